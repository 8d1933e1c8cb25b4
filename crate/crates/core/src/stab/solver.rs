use crate::calculus::FaceSplits;
use crate::eos::Eos;
use crate::error::{Error, Result};
use crate::field::CellVectorField;
use crate::state::State;

use super::energy::discrete_energy;
use super::newton::newton_solve_mass;
use super::params::{StabParams, StepDiagnostics};
use super::scheme::{admissible_dt, check_entropy_conditions, momentum_update, stabilization, Stabilization};

/// The exact quantities an accepted step used, kept so the discrete energy
/// identities can be checked against them.
#[derive(Debug, Clone)]
pub struct StepRecord {
    pub dt: f64,
    pub eta: f64,
    pub grad_p: CellVectorField,
    pub splits: FaceSplits,
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: State,
    pub diagnostics: StepDiagnostics,
    pub record: StepRecord,
}

/// Semi-implicit stabilized solver; remembers the last accepted face
/// velocities to predict the next timestep.
#[derive(Debug, Clone)]
pub struct StabSolver {
    eos: Eos,
    params: StabParams,
    previous_splits: Option<FaceSplits>,
}

const PREDICTOR_SWEEPS: usize = 8;

impl StabSolver {
    pub fn new(eos: Eos, params: StabParams) -> Result<Self> {
        params.validate()?;
        Ok(StabSolver { eos, params, previous_splits: None })
    }

    pub fn eos(&self) -> &Eos {
        &self.eos
    }

    pub fn params(&self) -> &StabParams {
        &self.params
    }

    /// Timestep predicted from `ρⁿ`: the bound with the previous step's face
    /// velocities, and the bound with the shift of `p(ρⁿ)` evaluated at the
    /// trial step itself (iterated downwards until consistent).
    fn predict_dt(&self, state: &State, eta: f64, remaining: f64) -> f64 {
        let safety = self.params.cfl_safety;
        let mut dt = remaining;
        if let Some(prev) = &self.previous_splits {
            dt = admissible_dt(&state.rho, prev, safety, remaining);
        }
        for _ in 0..PREDICTOR_SWEEPS {
            let stab = stabilization(&state.rho, &state.u, dt, eta, &self.eos);
            let bound = admissible_dt(&state.rho, &stab.splits, safety, remaining);
            if bound >= dt {
                break;
            }
            dt = bound;
        }
        dt
    }

    /// Advances `state` by one accepted step without passing `t_end`.
    pub fn step(&mut self, state: &State, t_end: f64) -> Result<StepOutcome> {
        let remaining = t_end - state.time;
        if !(remaining > 0.0) {
            return Err(Error::InvalidInput(format!("state time {} is not before t_end {t_end}", state.time)));
        }
        let mut eta = self.params.eta_safety / state.rho.min();
        let mut dt = self.predict_dt(state, eta, remaining);
        let mut retries = 0;
        let mut last_reason = String::new();

        let (rho_new, iterations, residual, stab) = loop {
            if retries > self.params.dt_retry_max {
                return Err(Error::StepFailure { retries: retries - 1, time: state.time, reason: last_reason });
            }
            match newton_solve_mass(state, dt, eta, &self.eos, &self.params) {
                Ok(out) => {
                    let stab = stabilization(&out.rho, &state.u, dt, eta, &self.eos);
                    let check = check_entropy_conditions(&out.rho, &stab.splits, dt, eta);
                    if check.ok() {
                        break (out.rho, out.iterations, out.residual, stab);
                    }
                    last_reason = format!("entropy conditions violated (eta ok: {}, dt ok: {})", check.eta_ok, check.dt_ok);
                    if !check.eta_ok {
                        eta *= 2.0;
                    }
                    if !check.dt_ok {
                        dt *= 0.5;
                    }
                }
                Err(e @ (Error::NonConvergence { .. } | Error::LinearSolve(_) | Error::NegativeDensity { .. })) => {
                    last_reason = e.to_string();
                    dt *= 0.5;
                }
                Err(e) => return Err(e),
            }
            retries += 1;
            log::debug!("t = {}: retry {retries} with dt = {dt:e}, eta = {eta} ({last_reason})", state.time);
        };

        if let Some(cell) = rho_new.values().iter().position(|&r| !(r > 0.0)) {
            return Err(Error::NegativeDensity { cell, value: rho_new[cell] });
        }

        let u_new = momentum_update(state, &rho_new, &stab, dt);
        let time = if dt == remaining { t_end } else { state.time + dt };
        let new_state = State { rho: rho_new, u: u_new, time };
        let diagnostics = self.diagnostics(&new_state, dt, eta, iterations, residual, retries);
        let Stabilization { grad_p, splits, .. } = stab;
        self.previous_splits = Some(splits.clone());
        Ok(StepOutcome {
            state: new_state,
            diagnostics,
            record: StepRecord { dt, eta, grad_p, splits },
        })
    }

    fn diagnostics(&self, s: &State, dt: f64, eta: f64, iterations: usize, residual: f64, retries: usize) -> StepDiagnostics {
        let mom = s.total_momentum();
        let mut momentum = [0.0; 3];
        momentum[..mom.len()].copy_from_slice(&mom);
        let (_, energy) = discrete_energy(s, &self.eos);
        StepDiagnostics {
            time: s.time,
            dt,
            eta,
            newton_iterations: iterations,
            newton_residual: residual,
            mass: s.total_mass(),
            momentum,
            energy,
            min_rho: s.rho.min(),
            entropy_conditions_ok: true,
            dt_retries: retries,
        }
    }
}

/// Diagnostics of the initial state (step 0 of a run log).
pub fn initial_diagnostics(state: &State, eos: &Eos) -> StepDiagnostics {
    let mom = state.total_momentum();
    let mut momentum = [0.0; 3];
    momentum[..mom.len()].copy_from_slice(&mom);
    StepDiagnostics {
        time: state.time,
        dt: 0.0,
        eta: 0.0,
        newton_iterations: 0,
        newton_residual: 0.0,
        mass: state.total_mass(),
        momentum,
        energy: discrete_energy(state, eos).1,
        min_rho: state.rho.min(),
        entropy_conditions_ok: true,
        dt_retries: 0,
    }
}
