//! Analytical performance model for warp-specialized GeMM kernels.
//!
//! A DMA warp streams `A` and `B` tiles into a shared-memory ring while a
//! MATH warp consumes them. The crate predicts kernel time from problem size,
//! tiling and calibrated machine constants, fits those constants from
//! microbenchmarks, and searches tilings for the fastest or least-idle one.
//!
//! Core arithmetic is generic over the scalar type (see [`num`]); the
//! aliases below fix the concrete types used by the CLI: integer nanosecond
//! times and exact `i128` rationals.

pub mod calibration;
pub mod cli;
pub mod error;
pub mod measurements;
pub mod model;
pub mod num;
pub mod optimizer;
pub mod oracle;
pub mod profile;
pub mod simulator;
pub mod trace;
pub mod validate;

/// Integer nanoseconds.
pub type Nanos = u64;
/// Exact rational used for throughputs and fitting.
pub type Rational = num_rational::Ratio<i128>;

pub type TileTimes = model::TileTimes<Nanos>;
pub type EventTimeline = simulator::EventTimeline<Nanos>;
pub type LinearFit = calibration::LinearFit<Rational>;
pub type LoadSample = calibration::LoadSample<Rational>;
pub type ComputeSample = calibration::ComputeSample<Rational>;
pub type MeasurementSummary = calibration::MeasurementSummary<Rational>;

pub use error::ModelError;
pub use model::{MachineConfig, ProblemSize, TilingConfig, WaveTimeMode};
pub use optimizer::{Objective, OptimizationResult, SearchSpace};
pub use simulator::{simulate, SimulationResult};
