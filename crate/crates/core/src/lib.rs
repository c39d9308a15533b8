//! Stability calculus, Hom-quivers and point-level vortex equations for
//! holomorphic chains.

pub mod ags;
pub mod hom;
pub mod instance;
pub mod linalg;
pub mod oracle;
pub mod quiver;
pub mod sampling;
pub mod stability;
pub mod subobjects;
pub mod vortex;

pub use linalg::{CMat, RankTolerance, C64};
pub use oracle::{classify, Barcode, Interval, StabilityKind, StabilityVerdict};
pub use quiver::{Chain, DimVector, Quiver, QuiverTypeData, Representation};
pub use stability::{Rational, SlopeValue, StabilityParam, TauParam};
pub use vortex::{FlowConfig, FlowOutcome, HermitianMetric};
