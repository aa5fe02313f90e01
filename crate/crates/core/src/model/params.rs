use serde::{Deserialize, Serialize};

use super::ModelError;

/// Relative tolerance used by the PT-symmetry predicates.
pub const PT_RELATIVE_TOLERANCE: f64 = 1e-12;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= PT_RELATIVE_TOLERANCE * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn check_rate(name: &'static str, value: f64) -> Result<(), ModelError> {
    if !value.is_finite() {
        return Err(ModelError::NonFinite { name });
    }
    if value < 0.0 {
        return Err(ModelError::NegativeRate { name, value });
    }
    Ok(())
}

/// Which fiber carries the coherent input into the coupled resonators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputSide {
    Left,
    Right,
}

/// Which waveguide the photon is launched into at z = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WaveguidePort {
    A,
    B,
}

/// Rates and couplings of two directly coupled resonators, A with gain and
/// loss, B with loss only, each attached to one fiber.
///
/// All rates share one arbitrary frequency unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Intrinsic loss of resonator A.
    pub gamma_a: f64,
    /// Intrinsic loss of resonator B.
    pub gamma_b: f64,
    /// Fiber coupling loss of resonator A.
    pub kappa_a: f64,
    /// Fiber coupling loss of resonator B.
    pub kappa_b: f64,
    /// Gain rate of resonator A.
    pub gamma_g: f64,
    /// Inter-resonator coupling J.
    pub coupling: f64,
    pub detuning_a: f64,
    pub detuning_b: f64,
    /// Thermal occupancy of the intrinsic baths.
    pub n_th: f64,
    /// Input photon flux ⟨a_in† a_in⟩.
    pub input_flux: f64,
    /// Attach thermal occupancy to the fiber input ports as well. Off by
    /// default: the baths of the intrinsic losses carry `n_th` only.
    #[serde(default)]
    pub thermal_input_ports: bool,
}

impl SystemParams {
    /// Balanced configuration with γ_a + κ_a = γ_b + κ_b = `gamma`,
    /// κ_a = κ_b = `kappa` and zero detuning.
    pub fn balanced(
        gamma: f64,
        gamma_g: f64,
        kappa: f64,
        coupling: f64,
        n_th: f64,
        input_flux: f64,
    ) -> Self {
        Self {
            gamma_a: gamma - kappa,
            gamma_b: gamma - kappa,
            kappa_a: kappa,
            kappa_b: kappa,
            gamma_g,
            coupling,
            detuning_a: 0.0,
            detuning_b: 0.0,
            n_th,
            input_flux,
            thermal_input_ports: false,
        }
    }

    /// PT-symmetric configuration: balanced losses, γ_G = 2γ, zero
    /// temperature.
    pub fn pt_symmetric(gamma: f64, kappa: f64, coupling: f64, input_flux: f64) -> Self {
        Self::balanced(gamma, 2.0 * gamma, kappa, coupling, 0.0, input_flux)
    }

    pub fn total_loss_a(&self) -> f64 {
        self.gamma_a + self.kappa_a
    }

    pub fn total_loss_b(&self) -> f64 {
        self.gamma_b + self.kappa_b
    }

    /// The shared total loss γ. For unbalanced resonators this is the
    /// mean of the two total losses.
    pub fn gamma(&self) -> f64 {
        0.5 * (self.total_loss_a() + self.total_loss_b())
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        check_rate("gamma_a", self.gamma_a)?;
        check_rate("gamma_b", self.gamma_b)?;
        check_rate("kappa_a", self.kappa_a)?;
        check_rate("kappa_b", self.kappa_b)?;
        check_rate("gamma_G", self.gamma_g)?;
        check_rate("n_th", self.n_th)?;
        check_rate("I_in", self.input_flux)?;
        check_rate("J", self.coupling)?;
        if self.coupling == 0.0 {
            return Err(ModelError::ZeroCoupling);
        }
        if !self.detuning_a.is_finite() {
            return Err(ModelError::NonFinite { name: "delta_a" });
        }
        if !self.detuning_b.is_finite() {
            return Err(ModelError::NonFinite { name: "delta_b" });
        }
        Ok(())
    }

    /// γ_a + κ_a = γ_b + κ_b and δ_a = δ_b = 0.
    pub fn is_balanced(&self) -> bool {
        self.balance_violation().is_none()
    }

    /// Names the first violated equality of the balanced configuration.
    pub fn balance_violation(&self) -> Option<&'static str> {
        if !close(self.total_loss_a(), self.total_loss_b()) {
            return Some("gamma_a + kappa_a = gamma_b + kappa_b");
        }
        if self.detuning_a != 0.0 {
            return Some("delta_a = 0");
        }
        if self.detuning_b != 0.0 {
            return Some("delta_b = 0");
        }
        None
    }

    /// Names the first violated equality of the PT-symmetric configuration.
    pub fn pt_violation(&self) -> Option<&'static str> {
        self.balance_violation().or_else(|| {
            (!close(self.gamma_g, 2.0 * self.total_loss_a())).then_some("gamma_G = 2 gamma")
        })
    }

    pub fn is_pt_symmetric(&self) -> bool {
        self.pt_violation().is_none()
    }
}

/// Two evanescently coupled waveguides of length `length`; A is pumped,
/// both lose at rate `gamma` per unit length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveguideParams {
    pub gamma: f64,
    pub gamma_g: f64,
    pub coupling: f64,
    pub length: f64,
    pub n_th: f64,
    pub input: WaveguidePort,
}

impl WaveguideParams {
    /// PT-symmetric pair (γ_G = 2γ) at zero temperature.
    pub fn pt_symmetric(gamma: f64, coupling: f64, length: f64, input: WaveguidePort) -> Self {
        Self {
            gamma,
            gamma_g: 2.0 * gamma,
            coupling,
            length,
            n_th: 0.0,
            input,
        }
    }

    /// γ_Geff = γ_G − γ.
    pub fn effective_gain(&self) -> f64 {
        self.gamma_g - self.gamma
    }

    pub fn is_pt_symmetric(&self) -> bool {
        close(self.gamma_g, 2.0 * self.gamma)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        check_rate("gamma", self.gamma)?;
        check_rate("gamma_G", self.gamma_g)?;
        check_rate("J", self.coupling)?;
        check_rate("n_th", self.n_th)?;
        if !self.length.is_finite() {
            return Err(ModelError::NonFinite { name: "l" });
        }
        if self.length < 0.0 {
            return Err(ModelError::NegativeLength(self.length));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pt_predicate_names_violation() {
        let mut p = SystemParams::pt_symmetric(1.0, 0.5, 1.0, 1.0);
        assert!(p.is_pt_symmetric());
        p.gamma_g = 1.5;
        assert_eq!(p.pt_violation(), Some("gamma_G = 2 gamma"));
        p.gamma_b = 0.7;
        assert_eq!(p.pt_violation(), Some("gamma_a + kappa_a = gamma_b + kappa_b"));
    }

    #[test]
    fn rejects_negative_and_zero_coupling() {
        let mut p = SystemParams::pt_symmetric(1.0, 0.5, 1.0, 1.0);
        p.kappa_b = -0.1;
        assert!(matches!(
            p.validate(),
            Err(ModelError::NegativeRate { name: "kappa_b", .. })
        ));
        let p = SystemParams::pt_symmetric(1.0, 0.5, 0.0, 1.0);
        assert_eq!(p.validate(), Err(ModelError::ZeroCoupling));
    }

    #[test]
    fn waveguide_effective_gain() {
        let w = WaveguideParams::pt_symmetric(2.0, 1.0, 1.0, WaveguidePort::A);
        assert_eq!(w.effective_gain(), 2.0);
        assert!(w.is_pt_symmetric());
        let bad = WaveguideParams { length: -1.0, ..w };
        assert_eq!(bad.validate(), Err(ModelError::NegativeLength(-1.0)));
    }
}
