//! Interactive constrained MAP-Elites over graph grammars.
//!
//! Each cell of the behavior grid holds a feasible and an infeasible
//! population. The archive keeps a snapshot of the designer's graph as the
//! rewriting target; injecting a new snapshot moves individuals between
//! cells as their Step values change.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::evaluation::{
    bucketize, check_feasibility, Dimension, DimensionSpec, Evaluation, EvaluationContext,
};
use crate::grammar::{apply_recipe, crossover, mutate, sample_recipes, GraphGrammar, Recipe};
use crate::graph::{GraphDigest, LevelConstraints, NarrativeGraph};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchiveConfig {
    pub dims: DimensionSpec,
    /// Capacity of each population (feasible and infeasible) in a cell.
    pub cell_capacity: usize,
    /// Parent pairs drawn per generation; each pair yields two children.
    pub offspring_per_generation: usize,
    pub mutation_probability: f64,
    pub initial_population: usize,
    pub recipes_per_individual: usize,
    pub constraints: Option<LevelConstraints>,
    pub seed: u64,
}

impl Default for ArchiveConfig {
    fn default() -> Self {
        ArchiveConfig {
            dims: DimensionSpec::pair(),
            cell_capacity: 25,
            offspring_per_generation: 100,
            mutation_probability: 0.5,
            initial_population: 1000,
            recipes_per_individual: 5,
            constraints: None,
            seed: 0,
        }
    }
}

impl ArchiveConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.cell_capacity == 0 {
            return Err("cell_capacity must be at least 1".into());
        }
        if self.offspring_per_generation == 0 {
            return Err("offspring_per_generation must be at least 1".into());
        }
        if self.recipes_per_individual == 0 {
            return Err("recipes_per_individual must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.mutation_probability) {
            return Err("mutation_probability must lie in [0, 1]".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct Individual<S> {
    pub genotype: GraphGrammar,
    pub phenotype: NarrativeGraph,
    pub digest: GraphDigest,
    pub evaluation: Evaluation<S>,
    pub recipe: Recipe,
}

impl<S: Scalar> Individual<S> {
    /// Samples recipes from `genotype`, applies each to the context target
    /// and keeps the best result (feasible before infeasible, then fitness).
    pub fn develop<R: Rng + ?Sized>(
        genotype: GraphGrammar,
        ctx: &EvaluationContext,
        recipes: usize,
        rng: &mut R,
    ) -> Self {
        let mut best: Option<(NarrativeGraph, Evaluation<S>, Recipe)> = None;
        for recipe in sample_recipes(&genotype, recipes, rng) {
            let phenotype = apply_recipe(ctx.target(), &genotype, &recipe);
            let eval: Evaluation<S> = ctx.evaluate(&phenotype);
            let better = match &best {
                None => true,
                Some((_, b, _)) => (eval.feasible, eval.fitness) > (b.feasible, b.fitness),
            };
            if better {
                best = Some((phenotype, eval, recipe));
            }
        }
        let (phenotype, evaluation, recipe) = best.expect("at least one recipe");
        Individual {
            genotype,
            digest: phenotype.canonical_hash(),
            phenotype,
            evaluation,
            recipe,
        }
    }

    /// Individual whose phenotype is the target itself.
    pub fn identity(ctx: &EvaluationContext) -> Self {
        let phenotype = ctx.target().clone();
        Individual {
            genotype: GraphGrammar::identity(),
            digest: phenotype.canonical_hash(),
            evaluation: ctx.evaluate(&phenotype),
            phenotype,
            recipe: Recipe::empty(),
        }
    }

    pub fn fitness(&self) -> S {
        self.evaluation.fitness
    }

    pub fn is_feasible(&self) -> bool {
        self.evaluation.feasible
    }

    pub fn dimension(&self, dim: Dimension) -> S {
        self.evaluation.dimensions.get(dim)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct Cell<S> {
    pub coords: Vec<usize>,
    /// Sorted by fitness, best first.
    pub feasible: Vec<Individual<S>>,
    pub infeasible: Vec<Individual<S>>,
}

impl<S: Scalar> Cell<S> {
    fn new(coords: Vec<usize>) -> Self {
        Cell {
            coords,
            feasible: Vec::new(),
            infeasible: Vec::new(),
        }
    }

    pub fn elite(&self) -> Option<&Individual<S>> {
        self.feasible.first()
    }

    pub fn len(&self) -> usize {
        self.feasible.len() + self.infeasible.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn members(&self) -> impl Iterator<Item = &Individual<S>> {
        self.feasible.iter().chain(self.infeasible.iter())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InsertOutcome {
    Added,
    Replaced,
    Rejected,
}

/// Inserts into a population sorted best-first. When full, the worst member
/// is replaced only by a strictly better candidate; ties keep incumbents.
fn insert_sorted<S: Scalar>(
    pop: &mut Vec<Individual<S>>,
    ind: Individual<S>,
    capacity: usize,
) -> InsertOutcome {
    let full = pop.len() >= capacity;
    if full {
        match pop.last() {
            Some(worst) if ind.fitness() > worst.fitness() => {}
            _ => return InsertOutcome::Rejected,
        }
    }
    let at = pop.partition_point(|x| x.fitness() >= ind.fitness());
    pop.insert(at, ind);
    if full {
        pop.pop();
        InsertOutcome::Replaced
    } else {
        InsertOutcome::Added
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GenerationReport {
    pub generation: u64,
    pub children: usize,
    pub feasible_children: usize,
    pub inserted: usize,
    pub new_uniques: usize,
    /// Mean fitness over all children.
    pub child_fitness: f64,
    /// Mean fitness and interestingness over feasible children.
    pub feasible_child_fitness: Option<f64>,
    pub feasible_child_interestingness: Option<f64>,
    /// Means over the feasible children whose phenotype had never been seen.
    pub novel_fitness: Option<f64>,
    pub novel_interestingness: Option<f64>,
}

/// One cell of a two-dimensional projection of the archive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub cell: [usize; 2],
    pub fitness: f64,
    pub digest: GraphDigest,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub generation: u64,
    pub coverage: f64,
    pub grid: Vec<GridCell>,
    pub dims: Vec<Dimension>,
    pub granularity: usize,
}

/// Aggregates over the individuals currently stored.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ArchiveStats {
    pub individuals: usize,
    pub feasible: usize,
    pub occupied_cells: usize,
    pub mean_fitness_all: f64,
    pub mean_fitness_feasible: f64,
    pub mean_interestingness: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
struct ArchiveState<S> {
    config: ArchiveConfig,
    target: NarrativeGraph,
    generation: u64,
    uniques: BTreeSet<GraphDigest>,
    rng: ChaCha8Rng,
    cells: Vec<Cell<S>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "S: Scalar", into = "ArchiveState<S>", from = "ArchiveState<S>")]
pub struct Archive<S: Scalar> {
    config: ArchiveConfig,
    ctx: EvaluationContext,
    cells: BTreeMap<Vec<usize>, Cell<S>>,
    generation: u64,
    uniques: BTreeSet<GraphDigest>,
    rng: ChaCha8Rng,
}

impl<S: Scalar> From<Archive<S>> for ArchiveState<S> {
    fn from(a: Archive<S>) -> Self {
        ArchiveState {
            target: a.ctx.target().clone(),
            config: a.config,
            generation: a.generation,
            uniques: a.uniques,
            rng: a.rng,
            cells: a.cells.into_values().collect(),
        }
    }
}

impl<S: Scalar> From<ArchiveState<S>> for Archive<S> {
    fn from(s: ArchiveState<S>) -> Self {
        Archive {
            ctx: EvaluationContext::new(s.target, s.config.constraints),
            config: s.config,
            generation: s.generation,
            uniques: s.uniques,
            rng: s.rng,
            cells: s.cells.into_iter().map(|c| (c.coords.clone(), c)).collect(),
        }
    }
}

impl<S: Scalar> Archive<S> {
    /// Archive without an initial population.
    pub fn empty(config: ArchiveConfig, target: NarrativeGraph) -> Self {
        Archive {
            ctx: EvaluationContext::new(target, config.constraints),
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            cells: BTreeMap::new(),
            generation: 0,
            uniques: BTreeSet::new(),
        }
    }

    /// Seeds the archive with `initial_population` random grammars.
    pub fn new(config: ArchiveConfig, target: NarrativeGraph) -> Self {
        let mut archive = Archive::empty(config, target);
        let seeds: Vec<u64> = (0..archive.config.initial_population)
            .map(|_| archive.rng.random())
            .collect();
        let ctx = &archive.ctx;
        let recipes = archive.config.recipes_per_individual;
        let born: Vec<Individual<S>> = seeds
            .into_par_iter()
            .map(|seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let genotype = GraphGrammar::random(&mut rng);
                Individual::develop(genotype, ctx, recipes, &mut rng)
            })
            .collect();
        for ind in born {
            archive.record_unique(&ind);
            archive.insert(ind);
        }
        archive
    }

    pub fn config(&self) -> &ArchiveConfig {
        &self.config
    }

    pub fn target(&self) -> &NarrativeGraph {
        self.ctx.target()
    }

    pub fn context(&self) -> &EvaluationContext {
        &self.ctx
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn uniques(&self) -> usize {
        self.uniques.len()
    }

    pub fn dims(&self) -> &DimensionSpec {
        &self.config.dims
    }

    pub fn cells(&self) -> impl Iterator<Item = &Cell<S>> {
        self.cells.values()
    }

    pub fn cell(&self, coords: &[usize]) -> Option<&Cell<S>> {
        self.cells.get(coords)
    }

    pub fn individuals(&self) -> impl Iterator<Item = &Individual<S>> {
        self.cells.values().flat_map(|c| c.members())
    }

    pub fn len(&self) -> usize {
        self.cells.values().map(Cell::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn coords_of(&self, ind: &Individual<S>) -> Vec<usize> {
        self.config.dims.coords(&ind.evaluation.dimensions)
    }

    fn record_unique(&mut self, ind: &Individual<S>) -> bool {
        ind.is_feasible() && self.uniques.insert(ind.digest.clone())
    }

    /// Places `ind` in its cell and population.
    pub fn insert(&mut self, ind: Individual<S>) -> InsertOutcome {
        let coords = self.coords_of(&ind);
        let capacity = self.config.cell_capacity;
        let cell = self
            .cells
            .entry(coords.clone())
            .or_insert_with(|| Cell::new(coords));
        let pop = if ind.is_feasible() {
            &mut cell.feasible
        } else {
            &mut cell.infeasible
        };
        insert_sorted(pop, ind, capacity)
    }

    fn pick_parent<'a>(&self, keys: &[&'a Vec<usize>], rng: &mut ChaCha8Rng) -> &GraphGrammar
    where
        S: 'a,
    {
        let cell = &self.cells[keys[rng.random_range(0..keys.len())]];
        let i = rng.random_range(0..cell.len());
        if i < cell.feasible.len() {
            &cell.feasible[i].genotype
        } else {
            &cell.infeasible[i - cell.feasible.len()].genotype
        }
    }

    /// Breeds, evaluates and inserts one generation of offspring.
    pub fn step_generation(&mut self) -> GenerationReport {
        let keys: Vec<&Vec<usize>> = self
            .cells
            .iter()
            .filter(|(_, c)| !c.is_empty())
            .map(|(k, _)| k)
            .collect();
        let mut rng = self.rng.clone();
        let mut children = Vec::new();
        if !keys.is_empty() {
            for _ in 0..self.config.offspring_per_generation {
                let a = self.pick_parent(&keys, &mut rng);
                let b = self.pick_parent(&keys, &mut rng);
                let (x, y) = crossover(a, b, &mut rng);
                for child in [x, y] {
                    let child = if rng.random_bool(self.config.mutation_probability) {
                        mutate(&child, &mut rng)
                    } else {
                        child
                    };
                    children.push((child, rng.random::<u64>()));
                }
            }
        }
        self.rng = rng;

        let ctx = &self.ctx;
        let recipes = self.config.recipes_per_individual;
        let born: Vec<Individual<S>> = children
            .into_par_iter()
            .map(|(genotype, seed)| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Individual::develop(genotype, ctx, recipes, &mut rng)
            })
            .collect();

        let mut report = GenerationReport {
            children: born.len(),
            ..Default::default()
        };
        let (mut all, mut feas, mut int) = (0.0, 0.0, 0.0);
        let (mut novel_fit, mut novel_int) = (0.0, 0.0);
        for ind in born {
            let fitness = ind.fitness().as_f64();
            let interest = ind.dimension(Dimension::Interestingness).as_f64();
            all += fitness;
            if ind.is_feasible() {
                report.feasible_children += 1;
                feas += fitness;
                int += interest;
            }
            if self.record_unique(&ind) {
                report.new_uniques += 1;
                novel_fit += fitness;
                novel_int += interest;
            }
            if self.insert(ind) != InsertOutcome::Rejected {
                report.inserted += 1;
            }
        }
        if report.children > 0 {
            report.child_fitness = all / report.children as f64;
        }
        if report.feasible_children > 0 {
            let n = report.feasible_children as f64;
            report.feasible_child_fitness = Some(feas / n);
            report.feasible_child_interestingness = Some(int / n);
        }
        if report.new_uniques > 0 {
            let n = report.new_uniques as f64;
            report.novel_fitness = Some(novel_fit / n);
            report.novel_interestingness = Some(novel_int / n);
        }
        self.generation += 1;
        report.generation = self.generation;
        report
    }

    /// Re-inserts every individual, re-deriving cells from stored dimensions.
    fn rebuild(&mut self) {
        let old = std::mem::take(&mut self.cells);
        for cell in old.into_values() {
            for ind in cell.feasible.into_iter().chain(cell.infeasible) {
                self.insert(ind);
            }
        }
    }

    /// Replaces the target, refreshes every Step value and adds an
    /// individual whose phenotype is the new target.
    pub fn inject_target(&mut self, target: NarrativeGraph) {
        self.ctx = EvaluationContext::new(target, self.config.constraints);
        let ctx = &self.ctx;
        self.cells.par_iter_mut().for_each(|(_, cell)| {
            for ind in cell.feasible.iter_mut().chain(cell.infeasible.iter_mut()) {
                let step: S = ctx.step_of(&ind.phenotype);
                ind.evaluation.dimensions.set(Dimension::Step, step);
            }
        });
        self.rebuild();
        let identity = Individual::identity(&self.ctx);
        self.record_unique(&identity);
        self.insert(identity);
    }

    pub fn set_dimensions(&mut self, dims: DimensionSpec) {
        self.config.dims = dims;
        self.rebuild();
    }

    /// Changes the level constraints and reclassifies every individual.
    pub fn set_constraints(&mut self, constraints: Option<LevelConstraints>) {
        self.config.constraints = constraints;
        self.ctx = EvaluationContext::new(self.ctx.target().clone(), constraints);
        let ctx = &self.ctx;
        self.cells.par_iter_mut().for_each(|(_, cell)| {
            for ind in cell.feasible.iter_mut().chain(cell.infeasible.iter_mut()) {
                ind.evaluation = ctx.evaluate(&ind.phenotype);
            }
        });
        self.rebuild();
    }

    fn project(&self, ind: &Individual<S>, x: Dimension, y: Dimension) -> [usize; 2] {
        let g = self.config.dims.granularity();
        [bucketize(ind.dimension(x), g), bucketize(ind.dimension(y), g)]
    }

    /// Best feasible individual in each cell of the `(x, y)` projection.
    pub fn projected_elites(&self, x: Dimension, y: Dimension) -> BTreeMap<[usize; 2], &Individual<S>> {
        let mut best: BTreeMap<[usize; 2], &Individual<S>> = BTreeMap::new();
        for elite in self.cells.values().filter_map(Cell::elite) {
            let key = self.project(elite, x, y);
            match best.get(&key) {
                Some(cur) if cur.fitness() >= elite.fitness() => {}
                _ => {
                    best.insert(key, elite);
                }
            }
        }
        best
    }

    pub fn elite_at(&self, x: Dimension, y: Dimension, cell: [usize; 2]) -> Option<&Individual<S>> {
        self.projected_elites(x, y).get(&cell).copied()
    }

    pub fn snapshot(&self, x: Dimension, y: Dimension) -> Snapshot {
        let granularity = self.config.dims.granularity();
        let grid: Vec<GridCell> = self
            .projected_elites(x, y)
            .into_iter()
            .map(|(cell, ind)| GridCell {
                cell,
                fitness: ind.fitness().as_f64(),
                digest: ind.digest.clone(),
            })
            .collect();
        Snapshot {
            generation: self.generation,
            coverage: grid.len() as f64 / (granularity * granularity) as f64,
            grid,
            dims: vec![x, y],
            granularity,
        }
    }

    pub fn stats(&self) -> ArchiveStats {
        let mut s = ArchiveStats::default();
        let (mut all, mut feas, mut int) = (0.0, 0.0, 0.0);
        for ind in self.individuals() {
            s.individuals += 1;
            all += ind.fitness().as_f64();
            if ind.is_feasible() {
                s.feasible += 1;
                feas += ind.fitness().as_f64();
                int += ind.dimension(Dimension::Interestingness).as_f64();
            }
        }
        s.occupied_cells = self.cells.values().filter(|c| !c.is_empty()).count();
        if s.individuals > 0 {
            s.mean_fitness_all = all / s.individuals as f64;
        }
        if s.feasible > 0 {
            s.mean_fitness_feasible = feas / s.feasible as f64;
            s.mean_interestingness = int / s.feasible as f64;
        }
        s
    }

    /// Verifies the structural invariants, describing the first violation.
    pub fn check_invariants(&self) -> Result<(), String> {
        let cap = self.config.cell_capacity;
        for (key, cell) in &self.cells {
            if &cell.coords != key {
                return Err(format!("cell {key:?} stores coords {:?}", cell.coords));
            }
            for (name, pop) in [("feasible", &cell.feasible), ("infeasible", &cell.infeasible)] {
                if pop.len() > cap {
                    return Err(format!("{name} population of {key:?} exceeds capacity"));
                }
                if pop.windows(2).any(|w| w[0].fitness() < w[1].fitness()) {
                    return Err(format!("{name} population of {key:?} is unsorted"));
                }
            }
            for ind in &cell.feasible {
                let (ok, v) = check_feasibility(&ind.phenotype, self.config.constraints.as_ref());
                if !ok || !ind.is_feasible() {
                    return Err(format!("infeasible individual in feasible population {key:?}: {v:?}"));
                }
            }
            if cell.infeasible.iter().any(|i| i.is_feasible()) {
                return Err(format!("feasible individual in infeasible population {key:?}"));
            }
            for ind in cell.members() {
                if self.coords_of(ind) != *key {
                    return Err(format!("individual in {key:?} belongs to {:?}", self.coords_of(ind)));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("archives serialize")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}
