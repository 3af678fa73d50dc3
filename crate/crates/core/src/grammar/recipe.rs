use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::graph::NarrativeGraph;

use super::{apply_rule, match_rule, GraphGrammar, MAX_REPETITIONS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RecipeStep {
    pub rule: usize,
    pub count: usize,
}

/// Ordered rule applications. A rule appears in at most one step.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Recipe {
    steps: Vec<RecipeStep>,
}

impl Recipe {
    pub fn empty() -> Self {
        Recipe::default()
    }

    pub fn steps(&self) -> &[RecipeStep] {
        &self.steps
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Appends a step, or adds `count` to the existing step for `rule`.
    pub fn push(&mut self, rule: usize, count: usize) {
        debug_assert!(count >= 1);
        match self.steps.iter_mut().find(|s| s.rule == rule) {
            Some(step) => step.count += count,
            None => self.steps.push(RecipeStep { rule, count }),
        }
    }

    pub fn from_draws(draws: &[(usize, usize)]) -> Self {
        let mut r = Recipe::empty();
        for &(rule, count) in draws {
            r.push(rule, count);
        }
        r
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Applied { rule: usize },
    Skipped { rule: usize },
}

/// Applies `recipe` to a copy of `target`, returning the result and a
/// per-application trace. Steps whose rule no longer matches are skipped.
pub fn apply_recipe_traced(
    target: &NarrativeGraph,
    grammar: &GraphGrammar,
    recipe: &Recipe,
) -> (NarrativeGraph, Vec<StepOutcome>) {
    let mut g = target.clone();
    let mut trace = Vec::new();
    for step in recipe.steps() {
        let rule = &grammar.rules[step.rule];
        for _ in 0..step.count {
            let next = match_rule(&g, rule).and_then(|b| apply_rule(&g, rule, &b));
            match next {
                Some(n) => {
                    g = n;
                    trace.push(StepOutcome::Applied { rule: step.rule });
                }
                None => trace.push(StepOutcome::Skipped { rule: step.rule }),
            }
        }
    }
    (g, trace)
}

pub fn apply_recipe(target: &NarrativeGraph, grammar: &GraphGrammar, recipe: &Recipe) -> NarrativeGraph {
    apply_recipe_traced(target, grammar, recipe).0
}

/// `n` recipes, each from 1..=|rules| draws of (rule, 1..=3 repetitions).
pub fn sample_recipes<R: Rng + ?Sized>(grammar: &GraphGrammar, n: usize, rng: &mut R) -> Vec<Recipe> {
    let rules = grammar.len();
    (0..n)
        .map(|_| {
            let draws = rng.random_range(1..=rules);
            let mut recipe = Recipe::empty();
            for _ in 0..draws {
                recipe.push(rng.random_range(0..rules), rng.random_range(1..=MAX_REPETITIONS));
            }
            recipe
        })
        .collect()
}
