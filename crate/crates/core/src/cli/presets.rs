//! Representative parameter sets for the three figure families. The values
//! are our own choices; all rates are in units of J.

use super::config::{Axis, Grid, Mode, SweepConfig, SystemKind};

/// Time axis used when a transient config gives none.
pub const DEFAULT_TIMES: Axis = Axis::Range(super::config::RangeSpec {
    start: 0.0,
    stop: 10.0,
    num: 101,
});

/// Length axis used when a waveguide config gives none.
pub const DEFAULT_LENGTHS: Axis = Axis::Range(super::config::RangeSpec {
    start: 0.0,
    stop: 10.0,
    num: 101,
});

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    /// Transmission and nonreciprocity transients, γ/J = 1 and 3.
    Fig2,
    /// Reflection transients over a longer window, γ/J = 1 and 3.
    Fig3,
    /// Waveguide outputs against Jl, γ/J = 1, 2 and 2.01.
    Fig4,
}

impl Preset {
    pub fn mode(self) -> Mode {
        match self {
            Preset::Fig2 | Preset::Fig3 => Mode::Transient,
            Preset::Fig4 => Mode::LengthSweep,
        }
    }

    pub fn config(self) -> SweepConfig {
        let transient = |stop: f64, num: usize| SweepConfig {
            system: Some(SystemKind::Resonator),
            mode: Some(Mode::Transient),
            grid: Grid {
                gamma: Some(Axis::list(&[1.0, 3.0])),
                kappa: Some(Axis::list(&[0.5])),
                coupling: Some(Axis::list(&[1.0])),
                input_flux: Some(Axis::list(&[1.0])),
                t: Some(Axis::range(0.0, stop, num)),
                ..Grid::default()
            },
            ..SweepConfig::default()
        };
        match self {
            Preset::Fig2 => transient(12.0, 1201),
            Preset::Fig3 => transient(22.0, 2201),
            // Close to the exceptional point the noise part of δI_r
            // outgrows the noise-free part by more than tenfold at Jl = 20.
            Preset::Fig4 => SweepConfig {
                system: Some(SystemKind::Waveguide),
                mode: Some(Mode::LengthSweep),
                grid: Grid {
                    gamma: Some(Axis::list(&[1.0, 2.0, 2.01])),
                    coupling: Some(Axis::list(&[1.0])),
                    l: Some(Axis::range(0.0, 20.0, 201)),
                    ..Grid::default()
                },
                ..SweepConfig::default()
            },
        }
    }
}
