use std::fs;
use std::path::Path;
use std::process::Command;

use story_experiments::{
    mean_present, run_experiment, DimsMode, ExperimentConfig, ExperimentError, ExperimentTarget, MeanStd,
};

fn small(exp: &str, generations: u64) -> ExperimentConfig {
    let mut c = ExperimentConfig::desk(ExperimentTarget::parse(exp).unwrap(), DimsMode::Pair);
    c.runs = 2;
    c.generations = generations;
    c.offspring_per_generation = 10;
    c.initial_population = 60;
    c.cell_capacity = 5;
    c
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn column(path: &Path, name: &str) -> Vec<Option<f64>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let idx = r.headers().unwrap().iter().position(|h| h == name).unwrap();
    r.records()
        .map(|rec| {
            let field = rec.unwrap()[idx].to_owned();
            (!field.is_empty()).then(|| field.parse().unwrap())
        })
        .collect()
}

#[test]
fn extended_run_matches_uninterrupted_run() {
    let fresh = tempfile::tempdir().unwrap();
    run_experiment(&small("1", 100), Some(fresh.path())).unwrap();

    let resumed = tempfile::tempdir().unwrap();
    run_experiment(&small("1", 50), Some(resumed.path())).unwrap();
    run_experiment(&small("1", 100), Some(resumed.path())).unwrap();

    for file in ["summary.csv", "run_0_series.csv", "run_1_series.csv", "tera.csv", "run_1/era_100.csv"] {
        assert_eq!(read(&fresh.path().join(file)), read(&resumed.path().join(file)), "{file}");
    }
}

#[test]
fn rerun_on_finished_output_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let config = small("2", 60);
    let first = run_experiment(&config, Some(dir.path())).unwrap();
    let summary = read(&dir.path().join("summary.csv"));
    let second = run_experiment(&config, Some(dir.path())).unwrap();
    assert_eq!(first, second);
    assert_eq!(summary, read(&dir.path().join("summary.csv")));
}

#[test]
fn mismatched_checkpoint_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    run_experiment(&small("1", 20), Some(dir.path())).unwrap();
    let mut other = small("1", 20);
    other.seed = 9;
    assert!(matches!(
        run_experiment(&other, Some(dir.path())),
        Err(ExperimentError::Checkpoint { .. })
    ));
    // Shrinking a finished run is also refused.
    assert!(run_experiment(&small("1", 10), Some(dir.path())).is_err());
}

#[test]
fn summary_is_recomputable_from_series() {
    let dir = tempfile::tempdir().unwrap();
    let config = small("3", 60);
    run_experiment(&config, Some(dir.path())).unwrap();
    let summary = dir.path().join("summary.csv");
    for (series_col, summary_col) in [
        ("fitness", "fitness_mean"),
        ("fitness_all", "fitness_all_mean"),
        ("interestingness", "interestingness_mean"),
        ("archive_fitness", "archive_fitness_mean"),
        ("archive_interestingness", "archive_interestingness_mean"),
    ] {
        let per_run: Vec<f64> = (0..config.runs)
            .map(|k| mean_present(column(&dir.path().join(format!("run_{k}_series.csv")), series_col)))
            .collect();
        let expected = MeanStd::of(&per_run).mean;
        let reported = column(&summary, summary_col)[0].unwrap();
        assert!((expected - reported).abs() < 1e-12, "{summary_col}: {expected} vs {reported}");
    }
    let last: Vec<f64> = (0..config.runs)
        .map(|k| {
            let c = column(&dir.path().join(format!("run_{k}_series.csv")), "coverage");
            c.last().copied().flatten().unwrap()
        })
        .collect();
    let reported = column(&summary, "coverage_mean")[0].unwrap();
    assert!((MeanStd::of(&last).mean - reported).abs() < 1e-12);
}

#[test]
fn series_are_cumulative() {
    let report = run_experiment(&small("1", 40), None).unwrap();
    for run in &report.runs {
        assert_eq!(run.series.len(), 41);
        for w in run.series.windows(2) {
            assert!(w[1].coverage >= w[0].coverage);
            assert!(w[1].uniques >= w[0].uniques);
            assert_eq!(w[1].generation, w[0].generation + 1);
        }
        assert!(run.series[0].fitness.is_none());
    }
}

#[test]
fn era_files_have_projection_shape() {
    let dir = tempfile::tempdir().unwrap();
    run_experiment(&small("1", 50), Some(dir.path())).unwrap();
    let text = read(&dir.path().join("run_0/era_50.csv"));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6);
    assert_eq!(lines[0], "interestingness\\step,0,1,2,3,4");
    for (i, line) in lines[1..].iter().enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), 6);
        assert_eq!(cells[0], (4 - i).to_string());
        for v in &cells[1..] {
            if !v.is_empty() {
                let f: f64 = v.parse().unwrap();
                assert!((0.0..=1.0).contains(&f));
            }
        }
    }
}

#[test]
fn step_replay_exports_every_target() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = ExperimentConfig::desk(ExperimentTarget::Steps, DimsMode::Pair);
    c.runs = 1;
    c.offspring_per_generation = 5;
    c.initial_population = 40;
    c.step_generations = 4;
    c.generations = 20;
    let report = run_experiment(&c, Some(dir.path())).unwrap();
    assert_eq!(report.summary.step_interestingness.len(), 5);
    let steps = read(&dir.path().join("step_summary.csv"));
    assert_eq!(steps.lines().count(), 6);
    for label in ["4.1", "4.5"] {
        assert!(dir.path().join(format!("target_{label}.graph.json")).is_file());
    }
    let used: Vec<usize> = report.runs[0].series.iter().map(|r| r.step).collect();
    assert_eq!(used[1..5], [0, 0, 0, 0]);
    assert_eq!(used[20], 4);
}

#[test]
fn cli_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_story-exp"))
        .args(["run", "--experiment", "1", "--dims", "all", "--constraints", "off"])
        .args(["--runs", "1", "--generations", "5", "--offspring", "5", "--initial-population", "30"])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("coverage"), "{stdout}");
    let summary = read(&dir.path().join("summary.csv"));
    assert!(summary.lines().nth(1).unwrap().starts_with("1,all,off,1,5,"));
    assert!(dir.path().join("target.graph.json").is_file());
    assert!(dir.path().join("run_0/era_5.csv").is_file());
}

#[test]
fn cli_rejects_unknown_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_story-exp"))
        .args(["run", "--experiment", "nope", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope"));
}
