use crate::error::{invalid, Result};

/// Controls for the stabilized semi-implicit scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabParams {
    /// `η = eta_safety / min ρ`; must be ≥ 1 for the entropy condition.
    pub eta_safety: f64,
    /// Fraction of the admissible timestep actually taken.
    pub cfl_safety: f64,
    /// Newton residual tolerance, relative to `max(1, ‖ρⁿ‖_∞)`, in density units.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub dt_retry_max: usize,
}

impl Default for StabParams {
    fn default() -> Self {
        StabParams {
            eta_safety: 1.1,
            cfl_safety: 0.9,
            newton_tol: 1e-10,
            newton_max_iter: 20,
            dt_retry_max: 30,
        }
    }
}

impl StabParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta_safety >= 1.0) {
            return invalid(format!("eta_safety must be >= 1, got {}", self.eta_safety));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return invalid(format!("cfl_safety must lie in (0, 1], got {}", self.cfl_safety));
        }
        if !(self.newton_tol > 0.0) {
            return invalid(format!("newton_tol must be positive, got {}", self.newton_tol));
        }
        if self.newton_max_iter == 0 {
            return invalid("newton_max_iter must be at least 1");
        }
        Ok(())
    }
}

/// Per-step ledger written to the run log.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDiagnostics {
    pub time: f64,
    pub dt: f64,
    pub eta: f64,
    pub newton_iterations: usize,
    pub newton_residual: f64,
    pub mass: f64,
    pub momentum: [f64; 3],
    pub energy: f64,
    pub min_rho: f64,
    pub entropy_conditions_ok: bool,
    pub dt_retries: usize,
}
