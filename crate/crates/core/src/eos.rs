//! Barotropic pressure law `p(ρ) = a ρ^γ`.

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eos {
    a: f64,
    gamma: f64,
}

impl Eos {
    pub fn new(a: f64, gamma: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return invalid(format!("pressure coefficient must be positive, got {a}"));
        }
        if !(gamma > 1.0) || !gamma.is_finite() {
            return invalid(format!("adiabatic exponent must exceed 1, got {gamma}"));
        }
        Ok(Eos { a, gamma })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn pressure(&self, rho: f64) -> f64 {
        debug_assert!(rho >= 0.0, "negative density {rho}");
        self.a * rho.powf(self.gamma)
    }

    /// `p'(ρ) = a γ ρ^(γ-1)`
    pub fn pressure_derivative(&self, rho: f64) -> f64 {
        debug_assert!(rho >= 0.0, "negative density {rho}");
        self.a * self.gamma * rho.powf(self.gamma - 1.0)
    }

    /// Pressure potential `ψ_γ(ρ) = a/(γ-1) ρ^γ`.
    pub fn pressure_potential(&self, rho: f64) -> f64 {
        debug_assert!(rho >= 0.0, "negative density {rho}");
        self.a / (self.gamma - 1.0) * rho.powf(self.gamma)
    }

    /// `ψ_γ'(ρ) = a γ/(γ-1) ρ^(γ-1)`
    pub fn pressure_potential_derivative(&self, rho: f64) -> f64 {
        debug_assert!(rho >= 0.0, "negative density {rho}");
        self.a * self.gamma / (self.gamma - 1.0) * rho.powf(self.gamma - 1.0)
    }

    /// `ψ_γ''(ρ) = a γ ρ^(γ-2)`
    pub fn pressure_potential_second_derivative(&self, rho: f64) -> f64 {
        self.a * self.gamma * rho.powf(self.gamma - 2.0)
    }

    pub fn sound_speed(&self, rho: f64) -> f64 {
        debug_assert!(rho > 0.0, "non-positive density {rho}");
        self.pressure_derivative(rho).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pressure_examples() {
        let e = Eos::new(1.0, 1.4).unwrap();
        assert_eq!(e.pressure(1.0), 1.0);
        assert_eq!(e.pressure(0.0), 0.0);
        // 2^1.4 = exp(1.4 ln 2)
        assert!((e.pressure(2.0) - 2.639_015_821_545_788_5).abs() < 1e-14);
    }

    #[test]
    fn potential_examples() {
        let e = Eos::new(1.0, 1.4).unwrap();
        assert!((e.pressure_potential(1.0) - 2.5).abs() < 1e-14);
        assert_eq!(e.pressure_potential(0.0), 0.0);
        let e2 = Eos::new(1.0, 2.0).unwrap();
        assert_eq!(e2.pressure_potential(2.0), 4.0);
    }

    #[test]
    fn sound_speed_examples() {
        let e = Eos::new(1.0, 1.4).unwrap();
        assert!((e.sound_speed(1.0) - 1.4f64.sqrt()).abs() < 1e-15);
        let e2 = Eos::new(1.0, 2.0).unwrap();
        assert!((e2.sound_speed(1.0) - 2f64.sqrt()).abs() < 1e-15);
        let e3 = Eos::new(0.5, 2.0).unwrap();
        assert_eq!(e3.sound_speed(1.0), 1.0);
    }

    #[test]
    fn potential_identity() {
        for gamma in [1.4, 5.0 / 3.0, 2.0] {
            let e = Eos::new(1.3, gamma).unwrap();
            for z in [0.1, 1.0, 10.0] {
                let lhs = z * e.pressure_potential_derivative(z) - e.pressure_potential(z);
                let p = e.pressure(z);
                assert!(((lhs - p) / p).abs() < 1e-12, "gamma {gamma} z {z}");
            }
        }
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(Eos::new(0.0, 1.4).is_err());
        assert!(Eos::new(1.0, 1.0).is_err());
        assert!(Eos::new(-1.0, 2.0).is_err());
    }
}
