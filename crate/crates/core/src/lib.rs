//! Numerical thermodynamic formalism for expanding repellers.
//!
//! The crate computes topological pressure of additive and singular-value
//! potentials by cylinder sums, solves Bowen's equation for the Hausdorff
//! dimension of the repeller, estimates Lyapunov exponents, and checks that
//! dimensions persist under random perturbations of the map.
//!
//! Modules follow the pipeline:
//!
//! * [`dynamics`]: expanding Markov maps, symbolic coding, cocycles.
//! * [`pressure`]: separated-set and transfer-matrix pressure.
//! * [`bowen`]: roots of `t ↦ P(−tΨ)` and dimension reports.
//! * [`lyapunov`]: Lyapunov exponents and the average-conformality screen.
//! * [`random`]: random perturbations, fiber conjugacies and the stability
//!   experiment.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bowen;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod lyapunov;
pub mod pressure;
pub mod random;

pub use error::{LabError, Result};

/// Crate version, recorded with every run.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use bowen::{bowen_root, dimension_report, DimensionReport};
pub use dynamics::{build_markov_map, ExpandingMap, MapSpec, Point, Word};
pub use lyapunov::{average_conformal_check, lyapunov_exponents, ConformalityReport, LyapunovSample, OrbitStart};
pub use pressure::{ConjugacyCheck, Potential, PressureConfig, PressureEstimate};
pub use random::{sample_base, BaseSample, FiberConjugacy, RandomFamily, RandomPressureEstimate};
