//! The semi-implicit, velocity-stabilized scheme.

pub mod energy;
pub mod newton;
pub mod params;
pub mod scheme;
pub mod solver;

pub use energy::{discrete_energy, verify_energy_identities, EnergyIdentityReport};
pub use newton::{newton_solve_mass, NewtonOutcome};
pub use params::{StabParams, StepDiagnostics};
pub use scheme::{
    admissible_dt, check_entropy_conditions, mass_residual, momentum_update, split_face_velocity, velocity_shift,
    EntropyCheck,
};
pub use solver::{initial_diagnostics, StabSolver, StepOutcome, StepRecord};
