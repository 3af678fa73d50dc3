//! Request and response documents.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use story_core::graph::GraphDocument;
use story_core::{
    detect_patterns, Dimension, DimensionSpec, Evaluation, GraphDigest, LevelConstraints, NarrativeGraph,
    PatternSet, Violation,
};

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    pub graph: Option<GraphDocument>,
    pub constraints: Option<LevelConstraints>,
    pub dims: Option<DimensionsBody>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimensionsBody {
    pub selected: Vec<String>,
    #[serde(default = "default_granularity")]
    pub granularity: usize,
}

fn default_granularity() -> usize {
    DimensionSpec::pair().granularity()
}

impl From<&DimensionSpec> for DimensionsBody {
    fn from(spec: &DimensionSpec) -> Self {
        DimensionsBody {
            selected: spec.selected().iter().map(|d| d.id().to_owned()).collect(),
            granularity: spec.granularity(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Running,
    Paused,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionInfo {
    pub id: String,
    pub status: Status,
    pub generation: u64,
    /// Seconds since the Unix epoch.
    pub created: u64,
    pub dims: DimensionsBody,
    pub constraints: Option<LevelConstraints>,
    pub individuals: usize,
    pub feasible: usize,
    pub uniques: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationDoc {
    pub feasible: bool,
    pub fitness: f64,
    pub cohesion: f64,
    pub consistency: f64,
    pub coherence: f64,
    pub infeasible_fitness: f64,
    pub interestingness: f64,
    pub dimensions: BTreeMap<String, f64>,
    pub violations: Vec<Violation>,
}

impl From<&Evaluation> for EvaluationDoc {
    fn from(e: &Evaluation) -> Self {
        EvaluationDoc {
            feasible: e.feasible,
            fitness: e.fitness,
            cohesion: e.cohesion,
            consistency: e.consistency,
            coherence: e.coherence,
            infeasible_fitness: e.infeasible_fitness,
            interestingness: e.dimensions.get(Dimension::Interestingness),
            dimensions: e.dimensions.iter().map(|(d, v)| (d.id().to_owned(), v)).collect(),
            violations: e.violations.clone(),
        }
    }
}

/// Instance counts keyed by pattern name; kinds without instances are omitted.
pub fn pattern_summary(patterns: &PatternSet) -> BTreeMap<String, usize> {
    patterns
        .summary()
        .into_iter()
        .filter(|&(_, n)| n > 0)
        .map(|(k, n)| (k.name().to_owned(), n))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetAck {
    pub generation: u64,
    pub graph: GraphDocument,
    pub digest: GraphDigest,
    pub evaluation: EvaluationDoc,
    pub patterns: BTreeMap<String, usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EliteView {
    pub cell: [usize; 2],
    pub projection: [Dimension; 2],
    pub graph: GraphDocument,
    pub digest: GraphDigest,
    pub fitness: f64,
    pub coherence: f64,
    pub interestingness: f64,
    pub evaluation: EvaluationDoc,
    pub patterns: BTreeMap<String, usize>,
}

/// Scores `g` from scratch against the session context.
pub(crate) fn describe(
    g: &NarrativeGraph,
    eval: &Evaluation,
) -> (GraphDocument, EvaluationDoc, BTreeMap<String, usize>) {
    (g.to_document(), EvaluationDoc::from(eval), pattern_summary(&detect_patterns(g)))
}
