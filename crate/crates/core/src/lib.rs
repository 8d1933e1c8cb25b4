//! Entropy-stable finite volumes for the barotropic Euler equations on
//! periodic structured meshes.
//!
//! The stabilized scheme solves the mass balance implicitly for the new
//! density, with the convecting velocity shifted by `ηδt∇p`, and then updates
//! the momentum explicitly. An explicit Rusanov solver provides reference
//! solutions, and [`analysis`] compares sequences of runs.

pub mod analysis;
pub mod calculus;
pub mod cases;
pub mod driver;
pub mod eos;
pub mod error;
pub mod field;
pub mod linalg;
pub mod mesh;
pub mod projection;
pub mod rusanov;
pub mod runlog;
pub mod snapshot;
pub mod stab;
pub mod state;

pub use eos::Eos;
pub use error::{Error, Result};
pub use field::{CellField, CellVectorField};
pub use mesh::StructuredMesh;
pub use state::State;
