//! Trope-based narrative graphs and the quality-diversity search that
//! generates alternatives to them.
//!
//! Scores are generic over [`Scalar`]; the aliases below fix the common
//! instantiations.

pub mod archive;
pub mod error;
pub mod evaluation;
pub mod grammar;
pub mod graph;
pub mod patterns;
pub mod scalar;

pub use archive::{ArchiveConfig, ArchiveStats, GenerationReport, GridCell, InsertOutcome, Snapshot};
pub use error::{DocumentError, EvaluationError, GraphError};
pub use evaluation::{Dimension, DimensionSpec, Violation};
pub use graph::{
    EdgeKind, GraphDigest, GraphEdit, LevelConstraints, NarrativeEdge, NarrativeGraph, NodeId,
    TropeClass, TropeType,
};
pub use patterns::{detect_patterns, PatternInstance, PatternKind, PatternSet, Quality};
pub use scalar::Scalar;

/// Exact rational scores.
pub type Exact = num_rational::Ratio<i64>;

pub type Evaluation = evaluation::Evaluation<f64>;
pub type ExactEvaluation = evaluation::Evaluation<Exact>;
pub type DimensionValues = evaluation::DimensionValues<f64>;

pub type Archive = archive::Archive<f64>;
pub type Individual = archive::Individual<f64>;
