//! Graph-grammar genotypes.
//!
//! A grammar is an ordered list of production rules. Each rule rewrites one
//! occurrence of its left-hand pattern into its right-hand graph; recipes
//! pick which rules to apply and how many times.

mod matching;
mod recipe;
mod variation;

use std::fmt;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{EdgeKind, TropeClass, TropeType};

pub use matching::{apply_rule, match_rule, Binding};
pub use recipe::{apply_recipe, apply_recipe_traced, sample_recipes, Recipe, RecipeStep, StepOutcome};
pub use variation::{crossover, mutate, mutate_traced, MutationKind};

pub const MAX_LHS_NODES: usize = 4;
pub const MAX_RHS_NODES: usize = 6;
pub const MAX_RULES: usize = 12;
pub const MAX_INITIAL_RULES: usize = 6;
pub const MAX_REPETITIONS: usize = 3;
/// Rewrites that would grow a phenotype past this size are skipped.
pub const MAX_PHENOTYPE_NODES: usize = 40;

/// Node label in a rule: a concrete trope or any trope of a class.
///
/// On the right-hand side a class label keeps the matched trope when it
/// already belongs to the class and otherwise falls back to the class
/// representative.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Trope(TropeType),
    Class(TropeClass),
}

impl Label {
    pub fn matches(self, trope: TropeType) -> bool {
        match self {
            Label::Trope(t) => t == trope,
            Label::Class(c) => trope.class() == c,
        }
    }

    pub fn resolve(self, current: Option<TropeType>) -> TropeType {
        match (self, current) {
            (Label::Trope(t), _) => t,
            (Label::Class(c), Some(t)) if t.class() == c => t,
            (Label::Class(c), _) => c.representative(),
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Label {
        if rng.random_bool(0.25) {
            Label::Class(*TropeClass::ALL.choose(rng).expect("non-empty"))
        } else {
            Label::Trope(*TropeType::ALL.choose(rng).expect("non-empty"))
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Trope(t) => f.write_str(t.code()),
            Label::Class(c) => write!(f, "*{}", class_code(*c)),
        }
    }
}

fn class_code(c: TropeClass) -> &'static str {
    match c {
        TropeClass::Hero => "hero-character",
        TropeClass::Villain => "villain-character",
        TropeClass::Structure => "structure",
        TropeClass::PlotDevice => "plot-device",
    }
}

impl Serialize for Label {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        if let Some(class) = text.strip_prefix('*') {
            TropeClass::ALL
                .into_iter()
                .find(|&c| class_code(c) == class)
                .map(Label::Class)
                .ok_or_else(|| serde::de::Error::custom(format!("unknown trope class {class:?}")))
        } else {
            TropeType::from_code(&text)
                .map(Label::Trope)
                .ok_or_else(|| serde::de::Error::custom(format!("unknown trope code {text:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RuleEdge {
    pub src: usize,
    pub dst: usize,
    pub kind: EdgeKind,
}

/// Small labelled graph used as either side of a rule.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RuleGraph {
    pub nodes: Vec<Label>,
    pub edges: Vec<RuleEdge>,
}

impl RuleGraph {
    fn is_valid(&self) -> bool {
        let n = self.nodes.len();
        self.edges.iter().enumerate().all(|(i, e)| {
            e.src < n && e.dst < n && e.src != e.dst && !self.edges[..i].contains(e)
        })
    }

    /// Adds an edge unless it is a self-loop or duplicate.
    fn add_edge(&mut self, edge: RuleEdge) -> bool {
        if edge.src == edge.dst || self.edges.contains(&edge) {
            return false;
        }
        self.edges.push(edge);
        true
    }

    /// Removes node `idx` with its edges and shifts later indices down.
    fn remove_node(&mut self, idx: usize) {
        self.nodes.remove(idx);
        self.edges.retain(|e| e.src != idx && e.dst != idx);
        for e in &mut self.edges {
            if e.src > idx {
                e.src -= 1;
            }
            if e.dst > idx {
                e.dst -= 1;
            }
        }
    }
}

/// `lhs => rhs`. `mapping[i]` is the rhs node that lhs node `i` becomes;
/// `None` deletes the matched node, and rhs nodes outside the mapping's
/// image are created.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProductionRule {
    pub lhs: RuleGraph,
    pub rhs: RuleGraph,
    pub mapping: Vec<Option<usize>>,
}

impl ProductionRule {
    pub fn is_valid(&self) -> bool {
        let lhs_ok = (1..=MAX_LHS_NODES).contains(&self.lhs.nodes.len()) && self.lhs.is_valid();
        let rhs_ok = self.rhs.nodes.len() <= MAX_RHS_NODES && self.rhs.is_valid();
        let map_ok = self.mapping.len() == self.lhs.nodes.len()
            && self.mapping.iter().enumerate().all(|(i, m)| match m {
                None => true,
                Some(r) => *r < self.rhs.nodes.len() && !self.mapping[..i].contains(&Some(*r)),
            });
        lhs_ok && rhs_ok && map_ok
    }

    /// Rule that rewrites a node of `class` into itself.
    pub fn identity(class: TropeClass) -> Self {
        ProductionRule {
            lhs: RuleGraph {
                nodes: vec![Label::Class(class)],
                edges: vec![],
            },
            rhs: RuleGraph {
                nodes: vec![Label::Class(class)],
                edges: vec![],
            },
            mapping: vec![Some(0)],
        }
    }

    /// Makes the correspondence map consistent with both sides after a
    /// side has been swapped: out-of-range and repeated targets are dropped.
    pub(crate) fn repair_mapping(&mut self) {
        self.mapping.resize(self.lhs.nodes.len(), None);
        let rhs_len = self.rhs.nodes.len();
        let mut used = vec![false; rhs_len];
        for m in &mut self.mapping {
            if let Some(r) = *m {
                if r >= rhs_len || used[r] {
                    *m = None;
                } else {
                    used[r] = true;
                }
            }
        }
    }

    /// Random rule: a one-node or node-edge-node left side and a right side
    /// obtained from it by a few small edits.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut lhs = RuleGraph {
            nodes: vec![Label::random(rng)],
            edges: vec![],
        };
        if rng.random_bool(0.5) {
            lhs.nodes.push(Label::random(rng));
            lhs.edges.push(RuleEdge {
                src: 0,
                dst: 1,
                kind: random_kind(rng),
            });
        }
        let mut rule = ProductionRule {
            rhs: lhs.clone(),
            mapping: (0..lhs.nodes.len()).map(Some).collect(),
            lhs,
        };
        let edits = rng.random_range(1..=3);
        for _ in 0..edits {
            variation::edit_rhs(&mut rule, rng);
        }
        debug_assert!(rule.is_valid());
        rule
    }
}

pub(crate) fn random_kind<R: Rng + ?Sized>(rng: &mut R) -> EdgeKind {
    if rng.random_bool(0.5) {
        EdgeKind::Plain
    } else {
        EdgeKind::Entail
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GraphGrammar {
    pub rules: Vec<ProductionRule>,
}

impl GraphGrammar {
    pub fn new(rules: Vec<ProductionRule>) -> Self {
        GraphGrammar { rules }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let n = rng.random_range(1..=MAX_INITIAL_RULES);
        GraphGrammar {
            rules: (0..n).map(|_| ProductionRule::random(rng)).collect(),
        }
    }

    /// A single no-op rule.
    pub fn identity() -> Self {
        GraphGrammar {
            rules: vec![ProductionRule::identity(TropeClass::Hero)],
        }
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn is_valid(&self) -> bool {
        (1..=MAX_RULES).contains(&self.rules.len()) && self.rules.iter().all(|r| r.is_valid())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("grammars serialize")
    }
}

/// Seeded random grammar.
pub fn random_grammar<R: Rng + ?Sized>(rng: &mut R) -> GraphGrammar {
    GraphGrammar::random(rng)
}
