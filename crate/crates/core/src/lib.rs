//! Quantum Bayesian probability: coherence audits for betting books, Born
//! rule assignments, i.i.d. outcome statistics, and exchangeable-state
//! tomography.
//!
//! The numerical types are generic over the real scalar `T` (`f32` or `f64`);
//! the aliases below fix `T = f64` unless suffixed `F32`.

pub mod definetti;
pub mod dutch_book;
pub mod error;
pub mod gleason;
pub mod iid;
pub mod operator;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use rng::SeededRng;
pub use scalar::{LpScalar, Real};

pub type DensityOperator = operator::DensityOperator<f64>;
pub type Ket = operator::Ket<f64>;
pub type Projector = operator::Projector<f64>;
pub type MeasurementBasis = operator::MeasurementBasis<f64>;
pub type GeneratingFunction = definetti::GeneratingFunction<f64>;
pub type Schedule = definetti::Schedule<f64>;

pub type DensityOperatorF32 = operator::DensityOperator<f32>;
pub type KetF32 = operator::Ket<f32>;
pub type ProjectorF32 = operator::Projector<f32>;
pub type MeasurementBasisF32 = operator::MeasurementBasis<f32>;
pub type GeneratingFunctionF32 = definetti::GeneratingFunction<f32>;
pub type ScheduleF32 = definetti::Schedule<f32>;
