use story_core::{LevelConstraints, NarrativeGraph};

use crate::error::ExperimentError;

/// Identifiers accepted by [`builtin_target`].
pub const BUILTIN_IDS: [&str; 8] = ["1", "2", "3", "4.1", "4.2", "4.3", "4.4", "4.5"];

/// Design steps replayed by the sequential experiment, in order.
pub const STEP_IDS: [&str; 5] = ["4.1", "4.2", "4.3", "4.4", "4.5"];

fn source(id: &str) -> Option<(&'static str, LevelConstraints)> {
    let steps = LevelConstraints::new(2, 2, 2);
    Some(match id {
        "1" => (include_str!("../data/exp1.graph.json"), LevelConstraints::new(2, 2, 2)),
        "2" => (include_str!("../data/exp2.graph.json"), LevelConstraints::new(2, 2, 3)),
        "3" => (include_str!("../data/exp3.graph.json"), LevelConstraints::new(4, 1, 1)),
        "4.1" => (include_str!("../data/exp4_1.graph.json"), steps),
        "4.2" => (include_str!("../data/exp4_2.graph.json"), steps),
        "4.3" => (include_str!("../data/exp4_3.graph.json"), steps),
        "4.4" => (include_str!("../data/exp4_4.graph.json"), steps),
        "4.5" => (include_str!("../data/exp4_5.graph.json"), steps),
        _ => return None,
    })
}

/// Target graph and level budgets of a builtin experiment.
pub fn builtin_target(id: &str) -> Result<(NarrativeGraph, LevelConstraints), ExperimentError> {
    let (text, constraints) = source(id).ok_or_else(|| ExperimentError::NotFound(id.to_owned()))?;
    let graph = NarrativeGraph::from_json(text).expect("builtin targets are valid documents");
    Ok((graph, constraints))
}
