use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use story_core::{Archive, Dimension, GenerationReport};

/// Axes of the coverage and ERA projection.
pub const PROJECTION: (Dimension, Dimension) = (Dimension::Step, Dimension::Interestingness);

/// Archive measurements after one generation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub generation: u64,
    pub step: usize,
    /// Cumulative share of projected cells that have held a feasible elite.
    pub coverage: f64,
    pub occupied: usize,
    pub uniques: usize,
    pub individuals: usize,
    pub feasible: usize,
    /// Means over the children bred this generation (feasible ones unless
    /// marked `_all`). Absent for the initial population.
    pub fitness: Option<f64>,
    pub fitness_all: Option<f64>,
    pub interestingness: Option<f64>,
    /// Means over the feasible individuals stored in the archive.
    pub archive_fitness: Option<f64>,
    pub archive_interestingness: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EraMatrix {
    pub run: usize,
    pub generation: u64,
    pub granularity: usize,
    /// Row `y`, column `x` of the projection; `None` marks an empty cell.
    pub cells: Vec<Vec<Option<f64>>>,
}

impl EraMatrix {
    pub fn capture(archive: &Archive, run: usize) -> Self {
        let snap = archive.snapshot(PROJECTION.0, PROJECTION.1);
        let g = snap.granularity;
        let mut cells = vec![vec![None; g]; g];
        for c in &snap.grid {
            cells[c.cell[1]][c.cell[0]] = Some(c.fitness);
        }
        EraMatrix {
            run,
            generation: snap.generation,
            granularity: g,
            cells,
        }
    }
}

/// Accumulates the per-generation series of one run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Recorder {
    covered: BTreeSet<[usize; 2]>,
    granularity: usize,
    rows: Vec<SeriesRow>,
}

impl Recorder {
    pub fn record(&mut self, archive: &Archive, step: usize, bred: Option<&GenerationReport>) {
        let snap = archive.snapshot(PROJECTION.0, PROJECTION.1);
        self.granularity = snap.granularity;
        self.covered.extend(snap.grid.iter().map(|c| c.cell));
        let stats = archive.stats();
        let feasible = (stats.feasible > 0).then_some(());
        self.rows.push(SeriesRow {
            generation: archive.generation(),
            step,
            coverage: self.covered.len() as f64 / (snap.granularity * snap.granularity) as f64,
            occupied: stats.occupied_cells,
            uniques: archive.uniques(),
            individuals: stats.individuals,
            feasible: stats.feasible,
            fitness: bred.and_then(|r| r.feasible_child_fitness),
            fitness_all: bred.filter(|r| r.children > 0).map(|r| r.child_fitness),
            interestingness: bred.and_then(|r| r.feasible_child_interestingness),
            archive_fitness: feasible.map(|_| stats.mean_fitness_feasible),
            archive_interestingness: feasible.map(|_| stats.mean_interestingness),
        });
    }

    pub fn rows(&self) -> &[SeriesRow] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<SeriesRow> {
        self.rows
    }
}

/// Mean of the present values, or 0 when none are present.
pub fn mean_present(values: impl IntoIterator<Item = Option<f64>>) -> f64 {
    let (sum, n) = values
        .into_iter()
        .flatten()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub run: usize,
    pub seed: u64,
    /// Final cumulative coverage.
    pub coverage: f64,
    pub uniques: usize,
    /// Per-generation mean fitness of feasible offspring, averaged over generations.
    pub fitness: f64,
    /// As `fitness`, over all offspring.
    pub fitness_all: f64,
    pub interestingness: f64,
    pub archive_fitness: f64,
    pub archive_interestingness: f64,
    /// Mean archive interestingness over the generations of each target step.
    pub step_interestingness: Vec<f64>,
}

impl RunMetrics {
    pub fn from_series(run: usize, seed: u64, rows: &[SeriesRow], steps: usize) -> Self {
        let last = rows.last().expect("at least the initial generation is recorded");
        RunMetrics {
            run,
            seed,
            coverage: last.coverage,
            uniques: last.uniques,
            fitness: mean_present(rows.iter().map(|r| r.fitness)),
            fitness_all: mean_present(rows.iter().map(|r| r.fitness_all)),
            interestingness: mean_present(rows.iter().map(|r| r.interestingness)),
            archive_fitness: mean_present(rows.iter().map(|r| r.archive_fitness)),
            archive_interestingness: mean_present(rows.iter().map(|r| r.archive_interestingness)),
            step_interestingness: (0..steps)
                .map(|s| mean_present(rows.iter().filter(|r| r.step == s).map(|r| r.archive_interestingness)))
                .collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single value.
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return MeanStd::default();
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        MeanStd { mean, std }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub experiment: String,
    pub dims: String,
    pub constraints: bool,
    pub runs: usize,
    pub generations: u64,
    pub coverage: MeanStd,
    pub uniques: MeanStd,
    pub fitness: MeanStd,
    pub interestingness: MeanStd,
    pub fitness_all: MeanStd,
    pub archive_fitness: MeanStd,
    pub archive_interestingness: MeanStd,
    pub step_interestingness: Vec<MeanStd>,
}

impl Summary {
    pub fn new(experiment: String, dims: String, constraints: bool, generations: u64, runs: &[RunMetrics]) -> Self {
        let col = |f: &dyn Fn(&RunMetrics) -> f64| MeanStd::of(&runs.iter().map(f).collect::<Vec<_>>());
        let steps = runs.first().map_or(0, |r| r.step_interestingness.len());
        Summary {
            experiment,
            dims,
            constraints,
            runs: runs.len(),
            generations,
            coverage: col(&|r| r.coverage),
            uniques: col(&|r| r.uniques as f64),
            fitness: col(&|r| r.fitness),
            interestingness: col(&|r| r.interestingness),
            fitness_all: col(&|r| r.fitness_all),
            archive_fitness: col(&|r| r.archive_fitness),
            archive_interestingness: col(&|r| r.archive_interestingness),
            step_interestingness: (0..steps).map(|s| col(&|r| r.step_interestingness[s])).collect(),
        }
    }
}

/// Average ranks (1-based), ties sharing the mean of their positions.
fn ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation; `None` when either side is constant or the
/// lengths differ.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = xs.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        return None;
    }
    Some(cov / (vx * vy).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_std() {
        let s = MeanStd::of(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert_eq!(s.mean, 5.0);
        assert!((s.std - (32.0f64 / 7.0).sqrt()).abs() < 1e-12);
        assert_eq!(MeanStd::of(&[3.0]).std, 0.0);
    }

    #[test]
    fn spearman_cases() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]), Some(1.0));
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), Some(-1.0));
        assert_eq!(spearman(&[1.0, 2.0], &[5.0, 5.0]), None);
        // Tied ranks: x = 1..5, y with a tie in the middle.
        let rho = spearman(&[1.0, 2.0, 3.0, 4.0, 5.0], &[0.0, 0.0, 0.1, 0.1, 0.3]).unwrap();
        assert!((rho - 0.9486832980505138).abs() < 1e-12);
    }

    #[test]
    fn absent_values_are_skipped() {
        assert_eq!(mean_present([Some(1.0), None, Some(3.0)]), 2.0);
        assert_eq!(mean_present([None]), 0.0);
    }
}
