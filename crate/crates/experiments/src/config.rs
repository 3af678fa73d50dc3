use std::path::Path;

use serde::{Deserialize, Serialize};
use story_core::{ArchiveConfig, DimensionSpec, LevelConstraints, NarrativeGraph};

use crate::error::ExperimentError;
use crate::targets::{builtin_target, BUILTIN_IDS, STEP_IDS};

/// Generations between checkpoints, ERA exports and design steps.
pub const CHECKPOINT_INTERVAL: u64 = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DimsMode {
    /// Step and interestingness.
    Pair,
    /// All seven dimensions.
    All,
}

impl DimsMode {
    pub fn spec(self) -> DimensionSpec {
        match self {
            DimsMode::Pair => DimensionSpec::pair(),
            DimsMode::All => DimensionSpec::all(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DimsMode::Pair => "pair",
            DimsMode::All => "all",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentTarget {
    Builtin(String),
    /// Replays the design steps 4.1 to 4.5, injecting each in turn.
    Steps,
    Custom {
        name: String,
        graph: NarrativeGraph,
        constraints: Option<LevelConstraints>,
    },
}

impl ExperimentTarget {
    /// Parses `"4"`, a builtin id, or the path of a graph document.
    pub fn parse(id: &str) -> Result<Self, ExperimentError> {
        if id == "4" {
            return Ok(ExperimentTarget::Steps);
        }
        if BUILTIN_IDS.contains(&id) {
            return Ok(ExperimentTarget::Builtin(id.to_owned()));
        }
        let path = Path::new(id);
        if !path.is_file() {
            return Err(ExperimentError::NotFound(id.to_owned()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::io(path, e))?;
        let graph = NarrativeGraph::from_json(&text).map_err(|source| ExperimentError::Document {
            path: path.to_owned(),
            source,
        })?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| id.to_owned());
        Ok(ExperimentTarget::Custom {
            name,
            graph,
            constraints: None,
        })
    }

    pub fn label(&self) -> String {
        match self {
            ExperimentTarget::Builtin(id) => id.clone(),
            ExperimentTarget::Steps => "4".to_owned(),
            ExperimentTarget::Custom { name, .. } => name.clone(),
        }
    }

    /// Targets in injection order with their labels.
    pub fn schedule(&self) -> Vec<(String, NarrativeGraph)> {
        match self {
            ExperimentTarget::Builtin(id) => vec![(id.clone(), builtin_target(id).expect("validated id").0)],
            ExperimentTarget::Steps => STEP_IDS
                .iter()
                .map(|id| (id.to_string(), builtin_target(id).expect("builtin").0))
                .collect(),
            ExperimentTarget::Custom { name, graph, .. } => vec![(name.clone(), graph.clone())],
        }
    }

    pub fn budgets(&self) -> Option<LevelConstraints> {
        match self {
            ExperimentTarget::Builtin(id) => Some(builtin_target(id).expect("validated id").1),
            ExperimentTarget::Steps => Some(builtin_target(STEP_IDS[0]).expect("builtin").1),
            ExperimentTarget::Custom { constraints, .. } => *constraints,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub target: ExperimentTarget,
    pub runs: usize,
    pub generations: u64,
    pub dims: DimsMode,
    pub constraints_enabled: bool,
    /// Run `k` is seeded with `seed + k`.
    pub seed: u64,
    pub offspring_per_generation: usize,
    pub initial_population: usize,
    pub cell_capacity: usize,
    /// Generations per design step when replaying steps.
    pub step_generations: u64,
}

impl ExperimentConfig {
    /// Five runs with the published generation counts.
    pub fn full(target: ExperimentTarget, dims: DimsMode) -> Self {
        let generations = match (&target, dims) {
            (ExperimentTarget::Steps, _) => CHECKPOINT_INTERVAL * STEP_IDS.len() as u64,
            (_, DimsMode::Pair) => 500,
            (_, DimsMode::All) => 250,
        };
        ExperimentConfig {
            target,
            runs: 5,
            generations,
            dims,
            constraints_enabled: true,
            seed: 0,
            offspring_per_generation: 100,
            initial_population: 1000,
            cell_capacity: 25,
            step_generations: CHECKPOINT_INTERVAL,
        }
    }

    /// Three runs of 100 generations with 50 parent pairs per generation.
    /// Step replays keep 50 generations per step.
    pub fn desk(target: ExperimentTarget, dims: DimsMode) -> Self {
        let mut c = ExperimentConfig::full(target, dims);
        c.runs = 3;
        c.offspring_per_generation = 50;
        if c.target != ExperimentTarget::Steps {
            c.generations = 100;
        }
        c
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::InvalidConfig(m.to_owned()));
        if self.runs == 0 {
            return bad("runs must be at least 1");
        }
        if self.generations == 0 {
            return bad("generations must be at least 1");
        }
        if self.step_generations == 0 {
            return bad("step generations must be at least 1");
        }
        if let ExperimentTarget::Builtin(id) = &self.target {
            builtin_target(id)?;
        }
        self.archive_config(0).validate().map_err(ExperimentError::InvalidConfig)
    }

    pub fn run_seed(&self, run: usize) -> u64 {
        self.seed.wrapping_add(run as u64)
    }

    pub fn constraints(&self) -> Option<LevelConstraints> {
        if self.constraints_enabled {
            self.target.budgets()
        } else {
            None
        }
    }

    pub fn archive_config(&self, run: usize) -> ArchiveConfig {
        ArchiveConfig {
            dims: self.dims.spec(),
            cell_capacity: self.cell_capacity,
            offspring_per_generation: self.offspring_per_generation,
            initial_population: self.initial_population,
            constraints: self.constraints(),
            seed: self.run_seed(run),
            ..ArchiveConfig::default()
        }
    }

    /// Index into the target schedule that is active during `generation`
    /// (generation 0 is the initial population).
    pub fn step_at(&self, generation: u64) -> usize {
        let steps = self.target.schedule().len();
        if generation == 0 {
            return 0;
        }
        (((generation - 1) / self.step_generations) as usize).min(steps - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles() {
        let full = ExperimentConfig::full(ExperimentTarget::Builtin("1".into()), DimsMode::Pair);
        assert_eq!((full.runs, full.generations, full.offspring_per_generation), (5, 500, 100));
        let all = ExperimentConfig::full(ExperimentTarget::Builtin("1".into()), DimsMode::All);
        assert_eq!(all.generations, 250);
        let desk = ExperimentConfig::desk(ExperimentTarget::Builtin("2".into()), DimsMode::All);
        assert_eq!((desk.runs, desk.generations, desk.offspring_per_generation), (3, 100, 50));
        let steps = ExperimentConfig::desk(ExperimentTarget::Steps, DimsMode::Pair);
        assert_eq!(steps.generations, 250);
    }

    #[test]
    fn step_schedule() {
        let c = ExperimentConfig::full(ExperimentTarget::Steps, DimsMode::Pair);
        assert_eq!(c.step_at(0), 0);
        assert_eq!(c.step_at(50), 0);
        assert_eq!(c.step_at(51), 1);
        assert_eq!(c.step_at(250), 4);
        assert_eq!(c.step_at(400), 4);
    }

    #[test]
    fn parse_ids() {
        assert_eq!(ExperimentTarget::parse("4").unwrap(), ExperimentTarget::Steps);
        assert_eq!(ExperimentTarget::parse("4.3").unwrap(), ExperimentTarget::Builtin("4.3".into()));
        assert!(matches!(ExperimentTarget::parse("no-such-file.json"), Err(ExperimentError::NotFound(_))));
    }

    #[test]
    fn zero_runs_rejected() {
        let mut c = ExperimentConfig::desk(ExperimentTarget::Builtin("1".into()), DimsMode::Pair);
        c.runs = 0;
        assert!(c.validate().is_err());
    }
}
