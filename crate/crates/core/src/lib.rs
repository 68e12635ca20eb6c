//! Work-decomposition laboratory for tiled GEMM.
//!
//! * [`domain`]: problem shapes, blocking factors, the m → n → k iteration
//!   linearization and [`WorkAssignment`].
//! * [`decompose`]: data-parallel, fixed-split, Stream-K and the two hybrid
//!   schedules.
//! * [`executor`]: threaded execution with partial-sum fixup, checked
//!   against a sequential blocked reference.
//! * [`costmodel`]: the per-CTA runtime model, grid-size selection and NNLS
//!   calibration.
//! * [`simulate`]: list-scheduled timelines, utilization and Gantt output.
//!
//! Numeric code is generic over [`Element`] (matrix elements) and
//! [`TimeScalar`] (modeled time). The aliases below name the common
//! instantiations.

pub mod costmodel;
pub mod decompose;
pub mod domain;
pub mod error;
pub mod executor;
pub mod matrix;
pub mod scalar;
pub mod simulate;

pub use costmodel::{CostParams, ParamsFile};
pub use decompose::{HybridVariant, Plan};
pub use domain::{BlockingFactors, CtaRange, DType, GemmProblem, Strategy, TileGrid, WorkAssignment};
pub use error::{Error, Result};
pub use matrix::Matrix;
pub use scalar::{Element, TimeScalar};
pub use simulate::Timeline;

/// Exact rational time, used where utilization must be compared exactly.
pub type Exact = num_rational::Rational64;

pub type MatrixI64 = Matrix<i64>;
pub type MatrixF32 = Matrix<f32>;
pub type MatrixF64 = Matrix<f64>;

pub type CostParamsF64 = CostParams<f64>;
pub type ExactCostParams = CostParams<Exact>;

pub type TimelineF64 = Timeline<f64>;
pub type ExactTimeline = Timeline<Exact>;
