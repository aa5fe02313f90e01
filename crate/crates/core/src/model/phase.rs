use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::eigen::eigenvalues;
use super::network::{resonator_drift, waveguide_drift};
use super::params::{SystemParams, WaveguideParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Unbroken,
    ExceptionalPoint,
    Broken,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Unbroken => "unbroken",
            Phase::ExceptionalPoint => "exceptional_point",
            Phase::Broken => "broken",
        }
    }
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseLabel {
    pub phase: Phase,
    pub steady_state_stable: bool,
    /// Relative window around γ = 2J treated as the exceptional point.
    pub ep_window: f64,
}

/// Anything with a loss γ, gain γ_G, coupling J and a 2×2 drift.
pub trait GainLossPair {
    fn loss(&self) -> f64;
    fn gain(&self) -> f64;
    fn coupling(&self) -> f64;
    fn drift(&self) -> DMatrix<Complex64>;
    /// True when the closed stability inequalities apply.
    fn balanced(&self) -> bool;
}

impl GainLossPair for SystemParams {
    fn loss(&self) -> f64 {
        self.gamma()
    }
    fn gain(&self) -> f64 {
        self.gamma_g
    }
    fn coupling(&self) -> f64 {
        self.coupling
    }
    fn drift(&self) -> DMatrix<Complex64> {
        resonator_drift(self)
    }
    fn balanced(&self) -> bool {
        self.is_balanced()
    }
}

impl GainLossPair for WaveguideParams {
    fn loss(&self) -> f64 {
        self.gamma
    }
    fn gain(&self) -> f64 {
        self.gamma_g
    }
    fn coupling(&self) -> f64 {
        self.coupling
    }
    fn drift(&self) -> DMatrix<Complex64> {
        waveguide_drift(self)
    }
    fn balanced(&self) -> bool {
        true
    }
}

/// Stability from the closed inequalities: either γ_G ≤ γ with J > 0, or
/// γ < γ_G < 2γ with J > √(γ(γ_G − γ))/2. `None` when the pair is not
/// balanced and the inequalities do not apply.
pub fn stability_by_inequality<P: GainLossPair>(params: &P) -> Option<bool> {
    if !params.balanced() {
        return None;
    }
    let (gamma, gain, j) = (params.loss(), params.gain(), params.coupling());
    let first = gain <= gamma && j > 0.0;
    let second = gamma < gain && gain < 2.0 * gamma && j > 0.5 * (gamma * (gain - gamma)).sqrt();
    Some(first || second)
}

/// Stability from the drift spectrum: every Re[Λ] < 0.
pub fn stability_by_spectrum<P: GainLossPair>(params: &P) -> bool {
    eigenvalues(&params.drift()).iter().all(|l| l.re < 0.0)
}

/// PT phase from γ against 2J, plus steady-state stability.
pub fn classify_phase<P: GainLossPair>(params: &P, ep_window: f64) -> PhaseLabel {
    let (gamma, j) = (params.loss(), params.coupling());
    let window = ep_window * 2.0 * j;
    let phase = if gamma < 2.0 * j - window {
        Phase::Unbroken
    } else if gamma > 2.0 * j + window {
        Phase::Broken
    } else {
        Phase::ExceptionalPoint
    };
    PhaseLabel {
        phase,
        steady_state_stable: stability_by_spectrum(params),
        ep_window,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::eigen::DEFAULT_EP_WINDOW;

    #[test]
    fn phases_by_gamma() {
        let unbroken = SystemParams::pt_symmetric(1.0, 0.5, 1.0, 1.0);
        assert_eq!(classify_phase(&unbroken, DEFAULT_EP_WINDOW).phase, Phase::Unbroken);
        let broken = SystemParams::pt_symmetric(3.0, 0.5, 1.0, 1.0);
        assert_eq!(classify_phase(&broken, DEFAULT_EP_WINDOW).phase, Phase::Broken);
        let ep = SystemParams::pt_symmetric(2.0, 0.5, 1.0, 1.0);
        assert_eq!(classify_phase(&ep, DEFAULT_EP_WINDOW).phase, Phase::ExceptionalPoint);
    }

    #[test]
    fn full_pt_gain_never_steady() {
        for j in [0.1, 0.5, 1.0, 3.0, 50.0] {
            let p = SystemParams::balanced(1.0, 2.0, 0.5, j, 0.0, 1.0);
            assert!(!classify_phase(&p, DEFAULT_EP_WINDOW).steady_state_stable);
            assert_eq!(stability_by_inequality(&p), Some(false));
        }
    }

    #[test]
    fn steady_example_is_stable() {
        let p = SystemParams::balanced(1.0, 1.0, 0.5, 1.0, 0.0, 1.0);
        assert!(classify_phase(&p, DEFAULT_EP_WINDOW).steady_state_stable);
        assert_eq!(stability_by_inequality(&p), Some(true));
    }

    #[test]
    fn detuned_pair_has_no_inequality_route() {
        let mut p = SystemParams::balanced(1.0, 1.0, 0.5, 1.0, 0.0, 1.0);
        p.detuning_a = 0.2;
        assert_eq!(stability_by_inequality(&p), None);
    }
}
