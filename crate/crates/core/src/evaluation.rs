//! Fitness, feasibility and behavior dimensions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::EvaluationError;
use crate::graph::{LevelConstraints, NarrativeGraph, Token, TropeClass};
use crate::patterns::{detect_patterns, PatternKind, PatternLevel, PatternSet};
use crate::scalar::Scalar;

/// Maximum consistency loss from fake conflicts.
pub const FAKE_CONFLICT_WEIGHT: (usize, usize) = (3, 10);
/// Normalization threshold for plot points, twists and devices.
pub const PATTERN_THRESHOLD: usize = 5;
/// Normalization threshold for explicit conflicts.
pub const CONFLICT_THRESHOLD: usize = 5;
pub const DEFAULT_GRANULARITY: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Step,
    Interestingness,
    Diversity,
    Conflicts,
    PlotPoints,
    PlotTwists,
    PlotDevices,
}

impl Dimension {
    pub const ALL: [Dimension; 7] = [
        Dimension::Step,
        Dimension::Interestingness,
        Dimension::Diversity,
        Dimension::Conflicts,
        Dimension::PlotPoints,
        Dimension::PlotTwists,
        Dimension::PlotDevices,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Dimension::Step => "step",
            Dimension::Interestingness => "interestingness",
            Dimension::Diversity => "diversity",
            Dimension::Conflicts => "conflicts",
            Dimension::PlotPoints => "plot_points",
            Dimension::PlotTwists => "plot_twists",
            Dimension::PlotDevices => "plot_devices",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Dimension {
    type Err = EvaluationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Dimension::ALL
            .into_iter()
            .find(|d| d.id() == s)
            .ok_or_else(|| EvaluationError::UnknownDimension(s.to_owned()))
    }
}

/// Which dimensions span the archive and how finely each is bucketed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionSpec {
    selected: Vec<Dimension>,
    granularity: usize,
}

impl DimensionSpec {
    pub fn new(selected: Vec<Dimension>, granularity: usize) -> Result<Self, EvaluationError> {
        if selected.is_empty() {
            return Err(EvaluationError::NoDimensions);
        }
        if granularity < 2 {
            return Err(EvaluationError::Granularity(granularity));
        }
        Ok(DimensionSpec {
            selected,
            granularity,
        })
    }

    pub fn from_ids<I, T>(ids: I, granularity: usize) -> Result<Self, EvaluationError>
    where
        I: IntoIterator<Item = T>,
        T: AsRef<str>,
    {
        let selected = ids
            .into_iter()
            .map(|s| s.as_ref().parse())
            .collect::<Result<Vec<Dimension>, _>>()?;
        DimensionSpec::new(selected, granularity)
    }

    /// Step x Interestingness.
    pub fn pair() -> Self {
        DimensionSpec {
            selected: vec![Dimension::Step, Dimension::Interestingness],
            granularity: DEFAULT_GRANULARITY,
        }
    }

    pub fn all() -> Self {
        DimensionSpec {
            selected: Dimension::ALL.to_vec(),
            granularity: DEFAULT_GRANULARITY,
        }
    }

    pub fn selected(&self) -> &[Dimension] {
        &self.selected
    }

    pub fn granularity(&self) -> usize {
        self.granularity
    }

    pub fn coords<S: Scalar>(&self, values: &DimensionValues<S>) -> Vec<usize> {
        self.selected
            .iter()
            .map(|&d| bucketize(values.get(d), self.granularity))
            .collect()
    }
}

impl Default for DimensionSpec {
    fn default() -> Self {
        DimensionSpec::pair()
    }
}

/// Values of all seven dimensions, each in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct DimensionValues<S>([S; 7]);

impl<S: Scalar> DimensionValues<S> {
    pub fn get(&self, dim: Dimension) -> S {
        self.0[dim.index()]
    }

    pub fn set(&mut self, dim: Dimension, value: S) {
        self.0[dim.index()] = value.clamp_unit();
    }

    pub fn iter(&self) -> impl Iterator<Item = (Dimension, S)> + '_ {
        Dimension::ALL.into_iter().map(move |d| (d, self.get(d)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Violation {
    Connectivity,
    SelfConflict,
    Heroes,
    Enemies,
    QuestItems,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct Evaluation<S> {
    pub feasible: bool,
    /// Coherence when feasible, infeasible fitness otherwise.
    pub fitness: S,
    pub cohesion: S,
    pub consistency: S,
    pub coherence: S,
    pub infeasible_fitness: S,
    pub dimensions: DimensionValues<S>,
    pub violations: Vec<Violation>,
}

/// `1 - (#Nothing + #BrokenLink) / (|V| + |E|)`.
pub fn cohesion<S: Scalar>(g: &NarrativeGraph, patterns: &PatternSet) -> S {
    let aux = patterns
        .instances()
        .iter()
        .filter(|i| i.kind.level() == PatternLevel::Auxiliary)
        .count();
    let total = g.node_count() + g.edge_count();
    (S::one() - S::ratio(aux, total)).clamp_unit()
}

/// Mean micro-pattern quality minus the fake-conflict penalty.
pub fn consistency<S: Scalar>(patterns: &PatternSet) -> S {
    let mut micro = 0usize;
    let mut sum = S::zero();
    for inst in patterns
        .instances()
        .iter()
        .filter(|i| i.kind.level() == PatternLevel::Micro)
    {
        micro += 1;
        sum = sum + inst.quality.value::<S>();
    }
    if micro == 0 {
        return S::zero();
    }
    let mean = sum / S::from_usize(micro).expect("count fits scalar");
    let (confs, fakes) = patterns
        .of_kind(PatternKind::ConfP)
        .fold((0, 0), |(c, f), i| (c + 1, f + usize::from(i.fake)));
    let penalty = if confs == 0 {
        S::zero()
    } else {
        S::ratio(FAKE_CONFLICT_WEIGHT.0, FAKE_CONFLICT_WEIGHT.1) * S::ratio(fakes, confs)
    };
    (mean - penalty).clamp_unit()
}

fn coherence_of<S: Scalar>(cohesion: S, consistency: S) -> S {
    let half = S::ratio(1, 2);
    (half * consistency + half * cohesion).clamp_unit()
}

pub fn coherence<S: Scalar>(g: &NarrativeGraph) -> S {
    let p = detect_patterns(g);
    coherence_of(cohesion(g, &p), consistency(&p))
}

/// Number of surplus self-conflicts: per node, self-conflicts beyond the first.
fn invalid_self_conflicts(g: &NarrativeGraph, patterns: &PatternSet) -> usize {
    (0..g.node_count())
        .map(|v| patterns.self_conflicts_of(v).saturating_sub(1))
        .sum()
}

fn infeasible_fitness_of<S: Scalar>(g: &NarrativeGraph, patterns: &PatternSet, cohesion: S) -> S {
    let reach: S = g.connectivity().reachable_fraction();
    let n = g.node_count();
    let invalid = invalid_self_conflicts(g, patterns).min(n);
    let valid = S::one() - S::ratio(invalid, n);
    (S::ratio(1, 2) * cohesion + S::ratio(1, 4) * reach + S::ratio(1, 4) * valid).clamp_unit()
}

pub fn infeasible_fitness<S: Scalar>(g: &NarrativeGraph) -> S {
    let p = detect_patterns(g);
    infeasible_fitness_of(g, &p, cohesion(g, &p))
}

fn violations_of(
    g: &NarrativeGraph,
    patterns: &PatternSet,
    constraints: Option<&LevelConstraints>,
) -> Vec<Violation> {
    let mut out = Vec::new();
    if !g.connectivity().fully_connected() {
        out.push(Violation::Connectivity);
    }
    if (0..g.node_count()).any(|v| patterns.self_conflicts_of(v) > 1) {
        out.push(Violation::SelfConflict);
    }
    if let Some(c) = constraints {
        if g.count_class(TropeClass::Hero) > c.heroes {
            out.push(Violation::Heroes);
        }
        if g.count_class(TropeClass::Villain) > c.enemies {
            out.push(Violation::Enemies);
        }
        if g.count_class(TropeClass::PlotDevice) > c.quest_items {
            out.push(Violation::QuestItems);
        }
    }
    out
}

pub fn check_feasibility(
    g: &NarrativeGraph,
    constraints: Option<&LevelConstraints>,
) -> (bool, Vec<Violation>) {
    let v = violations_of(g, &detect_patterns(g), constraints);
    (v.is_empty(), v)
}

fn mean_quality<S: Scalar>(patterns: &PatternSet, kind: PatternKind) -> S {
    let (count, sum) = patterns
        .of_kind(kind)
        .fold((0usize, S::zero()), |(c, s), i| (c + 1, s + i.quality.value::<S>()));
    if count == 0 {
        S::zero()
    } else {
        sum / S::from_usize(count).expect("count fits scalar")
    }
}

fn interestingness<S: Scalar>(patterns: &PatternSet) -> S {
    let third = S::ratio(1, 3);
    (third * mean_quality::<S>(patterns, PatternKind::Apd)
        + third * mean_quality::<S>(patterns, PatternKind::Pp)
        + third * mean_quality::<S>(patterns, PatternKind::Pt))
    .clamp_unit()
}

fn step<S: Scalar>(tokens: &[Token], target_tokens: &[Token]) -> S {
    let theta = tokens.len().max(target_tokens.len());
    if theta == 0 {
        return S::zero();
    }
    S::ratio(crate::graph::levenshtein(tokens, target_tokens), theta).clamp_unit()
}

fn pattern_dimension<S: Scalar>(
    dim: Dimension,
    g: &NarrativeGraph,
    patterns: &PatternSet,
    tokens: &[Token],
    target_tokens: &[Token],
) -> S {
    let capped = |n: usize, threshold: usize| S::ratio(n.min(threshold), threshold);
    match dim {
        Dimension::Step => step(tokens, target_tokens),
        Dimension::Interestingness => interestingness(patterns),
        Dimension::Diversity => {
            let present = TropeClass::ALL
                .iter()
                .filter(|&&c| g.count_class(c) > 0)
                .count();
            S::ratio(present, TropeClass::ALL.len())
        }
        Dimension::Conflicts => {
            let explicit = patterns
                .of_kind(PatternKind::ConfP)
                .filter(|c| !c.fake && !c.self_conflict)
                .count();
            capped(explicit, CONFLICT_THRESHOLD)
        }
        Dimension::PlotPoints => capped(patterns.count(PatternKind::Pp), PATTERN_THRESHOLD),
        Dimension::PlotTwists => capped(patterns.count(PatternKind::Pt), PATTERN_THRESHOLD),
        Dimension::PlotDevices => capped(patterns.count(PatternKind::Apd), PATTERN_THRESHOLD),
    }
}

/// Value of one dimension of `g`; `target` only matters for Step.
pub fn dimension_value<S: Scalar>(dim: Dimension, g: &NarrativeGraph, target: &NarrativeGraph) -> S {
    let patterns = detect_patterns(g);
    pattern_dimension(
        dim,
        g,
        &patterns,
        &g.canonical_tokens(),
        &target.canonical_tokens(),
    )
}

pub fn dimension_value_by_id<S: Scalar>(
    id: &str,
    g: &NarrativeGraph,
    target: &NarrativeGraph,
) -> Result<S, EvaluationError> {
    Ok(dimension_value(id.parse()?, g, target))
}

/// `min(floor(value * granularity), granularity - 1)`.
pub fn bucketize<S: Scalar>(value: S, granularity: usize) -> usize {
    let scaled = value.clamp_unit() * S::from_usize(granularity).expect("granularity fits scalar");
    scaled.floor_index().min(granularity - 1)
}

/// Target snapshot and constraints shared by a batch of evaluations.
#[derive(Clone, Debug)]
pub struct EvaluationContext {
    target: NarrativeGraph,
    target_tokens: Vec<Token>,
    constraints: Option<LevelConstraints>,
}

impl EvaluationContext {
    pub fn new(target: NarrativeGraph, constraints: Option<LevelConstraints>) -> Self {
        let target_tokens = target.canonical_tokens();
        EvaluationContext {
            target,
            target_tokens,
            constraints,
        }
    }

    pub fn target(&self) -> &NarrativeGraph {
        &self.target
    }

    pub fn constraints(&self) -> Option<&LevelConstraints> {
        self.constraints.as_ref()
    }

    pub fn step_of<S: Scalar>(&self, g: &NarrativeGraph) -> S {
        step(&g.canonical_tokens(), &self.target_tokens)
    }

    pub fn evaluate<S: Scalar>(&self, g: &NarrativeGraph) -> Evaluation<S> {
        self.evaluate_with_patterns(g, &detect_patterns(g))
    }

    pub fn evaluate_with_patterns<S: Scalar>(
        &self,
        g: &NarrativeGraph,
        patterns: &PatternSet,
    ) -> Evaluation<S> {
        let cohesion: S = cohesion(g, patterns);
        let consistency: S = consistency(patterns);
        let coherence = coherence_of(cohesion, consistency);
        let infeasible = infeasible_fitness_of(g, patterns, cohesion);
        let violations = violations_of(g, patterns, self.constraints.as_ref());
        let feasible = violations.is_empty();
        let tokens = g.canonical_tokens();
        let mut dimensions = DimensionValues([S::zero(); 7]);
        for dim in Dimension::ALL {
            dimensions.set(
                dim,
                pattern_dimension(dim, g, patterns, &tokens, &self.target_tokens),
            );
        }
        Evaluation {
            feasible,
            fitness: if feasible { coherence } else { infeasible },
            cohesion,
            consistency,
            coherence,
            infeasible_fitness: infeasible,
            dimensions,
            violations,
        }
    }
}

/// Evaluates `g` against `target` under optional level constraints.
pub fn evaluate<S: Scalar>(
    g: &NarrativeGraph,
    target: &NarrativeGraph,
    constraints: Option<&LevelConstraints>,
) -> Evaluation<S> {
    EvaluationContext::new(target.clone(), constraints.copied()).evaluate(g)
}
