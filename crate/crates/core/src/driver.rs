//! Time loop shared by both schemes.

use crate::eos::Eos;
use crate::error::{Error, Result};
use crate::rusanov::{rusanov_step, RusanovParams};
use crate::stab::{discrete_energy, initial_diagnostics, StabParams, StabSolver, StepDiagnostics, StepRecord};
use crate::state::State;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    Stab(StabParams),
    Rusanov(RusanovParams),
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Stab(_) => "stab",
            Scheme::Rusanov(_) => "rusanov",
        }
    }
}

/// What an observer sees after every accepted step.
#[derive(Debug)]
pub struct StepEvent<'a> {
    /// 1-based step counter.
    pub step: usize,
    pub old: &'a State,
    pub new: &'a State,
    pub diagnostics: &'a StepDiagnostics,
    /// Face velocities and pressure gradient used; stabilized scheme only.
    pub record: Option<&'a StepRecord>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub state: State,
    pub steps: usize,
    pub initial: StepDiagnostics,
}

const RUSANOV_CFL_RETRIES: usize = 8;

/// Advances `initial` to `t_end`, calling `observer` after each step.
///
/// For the Rusanov scheme the entropy flag in the diagnostics is always set,
/// since it has no a posteriori conditions to check, and a step producing a
/// non-positive density is retried with half the CFL number.
pub fn simulate(
    initial: State,
    eos: &Eos,
    scheme: Scheme,
    t_end: f64,
    mut observer: impl FnMut(&StepEvent) -> Result<()>,
) -> Result<RunSummary> {
    if !(t_end > initial.time) {
        return Err(Error::InvalidInput(format!("t_end {t_end} must exceed the initial time {}", initial.time)));
    }
    let start = initial_diagnostics(&initial, eos);
    let mut state = initial;
    let mut steps = 0;
    match scheme {
        Scheme::Stab(params) => {
            let mut solver = StabSolver::new(*eos, params)?;
            while state.time < t_end {
                let out = solver.step(&state, t_end)?;
                steps += 1;
                observer(&StepEvent {
                    step: steps,
                    old: &state,
                    new: &out.state,
                    diagnostics: &out.diagnostics,
                    record: Some(&out.record),
                })?;
                state = out.state;
            }
        }
        Scheme::Rusanov(params) => {
            params.validate()?;
            while state.time < t_end {
                let mut p = params;
                let mut retries = 0;
                let (next, dt) = loop {
                    match rusanov_step(&state, &p, eos, t_end) {
                        Ok(r) => break r,
                        Err(Error::NegativeDensity { cell, value }) if retries < RUSANOV_CFL_RETRIES => {
                            log::debug!("negative density {value} in cell {cell}; halving cfl to {}", p.cfl / 2.0);
                            p.cfl *= 0.5;
                            retries += 1;
                        }
                        Err(e) => return Err(e),
                    }
                };
                steps += 1;
                let mom = next.total_momentum();
                let mut momentum = [0.0; 3];
                momentum[..mom.len()].copy_from_slice(&mom);
                let diagnostics = StepDiagnostics {
                    time: next.time,
                    dt,
                    eta: 0.0,
                    newton_iterations: 0,
                    newton_residual: 0.0,
                    mass: next.total_mass(),
                    momentum,
                    energy: discrete_energy(&next, eos).1,
                    min_rho: next.rho.min(),
                    entropy_conditions_ok: true,
                    dt_retries: retries,
                };
                observer(&StepEvent { step: steps, old: &state, new: &next, diagnostics: &diagnostics, record: None })?;
                state = next;
            }
        }
    }
    Ok(RunSummary { state, steps, initial: start })
}

/// [`simulate`] without an observer.
pub fn run_to(initial: State, eos: &Eos, scheme: Scheme, t_end: f64) -> Result<State> {
    Ok(simulate(initial, eos, scheme, t_end, |_| Ok(()))?.state)
}
