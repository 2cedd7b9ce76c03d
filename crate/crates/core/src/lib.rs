//! Spectral-Galerkin solvers for Westervelt and Kuznetsov type equations with
//! strong damping `b`, and a harness that measures how solutions approach the
//! undamped limit as `b → 0`.

pub mod harness;
pub mod models;
pub mod norms;
pub mod picard;
pub mod spectral;
pub mod timeloop;
pub mod verify;

pub use harness::{InitialData, ModeAmplitude, SweepResult, SweepSpec};
pub use models::{ModelError, ModelKind, ModelParams};
pub use norms::{NormKind, RateFit, RateTable};
pub use picard::{PicardConfig, PicardError, PicardReport};
pub use spectral::{Domain, DomainSpec, SpectralField};
pub use timeloop::{CoefficientPath, SolveError, TimeGrid, Trajectory};
