use std::collections::BTreeMap;

use story_core::{
    Archive, ArchiveConfig, Dimension, DimensionSpec, GraphDigest, LevelConstraints, NarrativeGraph,
};

fn config(seed: u64) -> ArchiveConfig {
    ArchiveConfig {
        initial_population: 200,
        offspring_per_generation: 25,
        cell_capacity: 10,
        constraints: Some(LevelConstraints::new(2, 2, 2)),
        seed,
        ..Default::default()
    }
}

fn placement(a: &Archive) -> BTreeMap<GraphDigest, Vec<Vec<usize>>> {
    let mut out: BTreeMap<GraphDigest, Vec<Vec<usize>>> = BTreeMap::new();
    for cell in a.cells() {
        for ind in cell.feasible.iter().chain(&cell.infeasible) {
            out.entry(ind.digest.clone()).or_default().push(cell.coords.clone());
        }
    }
    for v in out.values_mut() {
        v.sort();
    }
    out
}

#[test]
fn invariants_hold_across_generations() {
    let mut a = Archive::new(config(1), NarrativeGraph::default_graph());
    a.check_invariants().unwrap();
    let mut uniques = a.uniques();
    for _ in 0..30 {
        let report = a.step_generation();
        assert_eq!(report.children, 50);
        a.check_invariants().unwrap();
        assert!(a.uniques() >= uniques);
        uniques = a.uniques();
    }
    assert_eq!(a.generation(), 30);
    assert!(a.stats().feasible > 0);
}

#[test]
fn same_seed_same_archive() {
    let run = || {
        let mut a = Archive::new(config(9), NarrativeGraph::default_graph());
        for _ in 0..5 {
            a.step_generation();
        }
        a.to_json()
    };
    assert_eq!(run(), run());
}

#[test]
fn unchanged_target_keeps_placements() {
    let mut a = Archive::new(config(2), NarrativeGraph::default_graph());
    for _ in 0..5 {
        a.step_generation();
    }
    let before = placement(&a);
    a.inject_target(NarrativeGraph::default_graph());
    let after = placement(&a);
    for (digest, cells) in &before {
        if let Some(now) = after.get(digest) {
            // The re-inserted target may only displace, never move.
            assert!(now.iter().all(|c| cells.contains(c)), "{digest:?} moved");
        }
    }
    a.check_invariants().unwrap();
}

#[test]
fn new_target_rebuckets_step() {
    let mut a = Archive::new(config(3), NarrativeGraph::default_graph());
    let target = NarrativeGraph::from_json(
        r#"{"nodes":[{"id":"a","trope":"SH"},{"id":"b","trope":"MCG"}],"edges":[{"src":"a","dst":"b","kind":"ENTAIL"}]}"#,
    )
    .unwrap();
    a.inject_target(target.clone());
    a.check_invariants().unwrap();
    let ctx = a.context();
    for ind in a.individuals() {
        assert_eq!(ind.dimension(Dimension::Step), ctx.step_of::<f64>(&ind.phenotype));
    }
    assert!(a.individuals().any(|i| i.phenotype == target));
}

#[test]
fn switching_dimensions_keeps_population() {
    let mut a = Archive::new(config(4), NarrativeGraph::default_graph());
    let before = a.len();
    a.set_dimensions(DimensionSpec::all());
    a.check_invariants().unwrap();
    // More cells can only relieve capacity pressure.
    assert!(a.len() >= before);
    a.set_dimensions(DimensionSpec::pair());
    a.check_invariants().unwrap();
}

#[test]
fn constraint_changes_reclassify() {
    let mut a = Archive::new(config(5), NarrativeGraph::default_graph());
    a.set_constraints(None);
    a.check_invariants().unwrap();
    a.set_constraints(Some(LevelConstraints::new(1, 1, 0)));
    a.check_invariants().unwrap();
}

#[test]
fn snapshot_is_consistent() {
    let mut a = Archive::new(config(6), NarrativeGraph::default_graph());
    a.step_generation();
    let s = a.snapshot(Dimension::Step, Dimension::Interestingness);
    assert_eq!(s.generation, 1);
    assert!(s.grid.len() <= 25);
    assert_eq!(s.coverage, s.grid.len() as f64 / 25.0);
    for c in &s.grid {
        let elite = a.elite_at(Dimension::Step, Dimension::Interestingness, c.cell).unwrap();
        assert_eq!(elite.digest, c.digest);
        assert!(elite.is_feasible());
    }
}
