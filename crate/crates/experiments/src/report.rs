use std::fs;
use std::path::Path;

use crate::error::ExperimentError;
use crate::metrics::{EraMatrix, MeanStd, SeriesRow, Summary};
use crate::run::ExperimentReport;

pub const SUMMARY_HEADER: [&str; 19] = [
    "experiment",
    "dims",
    "constraints",
    "runs",
    "generations",
    "coverage_mean",
    "coverage_std",
    "uniques_mean",
    "uniques_std",
    "fitness_mean",
    "fitness_std",
    "interestingness_mean",
    "interestingness_std",
    "fitness_all_mean",
    "fitness_all_std",
    "archive_fitness_mean",
    "archive_fitness_std",
    "archive_interestingness_mean",
    "archive_interestingness_std",
];

pub const SERIES_HEADER: [&str; 12] = [
    "generation",
    "step",
    "coverage",
    "occupied",
    "uniques",
    "individuals",
    "feasible",
    "fitness",
    "fitness_all",
    "interestingness",
    "archive_fitness",
    "archive_interestingness",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn pair(m: MeanStd) -> [String; 2] {
    [m.mean.to_string(), m.std.to_string()]
}

fn write_csv(path: &Path, rows: Vec<Vec<String>>) -> Result<(), ExperimentError> {
    let io = |e: csv::Error| ExperimentError::io(path, e.into());
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| ExperimentError::io(path, e))
}

pub fn summary_rows(s: &Summary) -> Vec<Vec<String>> {
    let mut row = vec![
        s.experiment.clone(),
        s.dims.clone(),
        if s.constraints { "on" } else { "off" }.to_owned(),
        s.runs.to_string(),
        s.generations.to_string(),
    ];
    for m in [
        s.coverage,
        s.uniques,
        s.fitness,
        s.interestingness,
        s.fitness_all,
        s.archive_fitness,
        s.archive_interestingness,
    ] {
        row.extend(pair(m));
    }
    vec![SUMMARY_HEADER.iter().map(|h| h.to_string()).collect(), row]
}

pub fn series_rows(series: &[SeriesRow]) -> Vec<Vec<String>> {
    let mut rows = vec![SERIES_HEADER.iter().map(|h| h.to_string()).collect()];
    for r in series {
        rows.push(vec![
            r.generation.to_string(),
            r.step.to_string(),
            r.coverage.to_string(),
            r.occupied.to_string(),
            r.uniques.to_string(),
            r.individuals.to_string(),
            r.feasible.to_string(),
            opt(r.fitness),
            opt(r.fitness_all),
            opt(r.interestingness),
            opt(r.archive_fitness),
            opt(r.archive_interestingness),
        ]);
    }
    rows
}

/// Rows from the top interestingness bucket down; columns are step buckets.
pub fn era_rows(era: &EraMatrix) -> Vec<Vec<String>> {
    let g = era.granularity;
    let mut header = vec!["interestingness\\step".to_owned()];
    header.extend((0..g).map(|x| x.to_string()));
    let mut rows = vec![header];
    for y in (0..g).rev() {
        let mut row = vec![y.to_string()];
        row.extend(era.cells[y].iter().map(|&v| opt(v)));
        rows.push(row);
    }
    rows
}

/// Writes `summary.csv`, `step_summary.csv` for multi-step runs,
/// `run_<k>_series.csv`, `run_<k>/era_<gen>.csv`, `tera.csv` and the target
/// graph documents into `dir`.
pub fn export_report(report: &ExperimentReport, dir: &Path) -> Result<(), ExperimentError> {
    fs::create_dir_all(dir).map_err(|e| ExperimentError::io(dir, e))?;
    write_csv(&dir.join("summary.csv"), summary_rows(&report.summary))?;

    if report.targets.len() > 1 {
        let mut rows = vec![vec![
            "step".to_owned(),
            "target".to_owned(),
            "interestingness_mean".to_owned(),
            "interestingness_std".to_owned(),
        ]];
        for (i, (label, _)) in report.targets.iter().enumerate() {
            let m = report.summary.step_interestingness[i];
            let [mean, std] = pair(m);
            rows.push(vec![i.to_string(), label.clone(), mean, std]);
        }
        write_csv(&dir.join("step_summary.csv"), rows)?;
    }

    let mut tera = vec![vec![
        "run".to_owned(),
        "generation".to_owned(),
        "step_bucket".to_owned(),
        "interestingness_bucket".to_owned(),
        "fitness".to_owned(),
    ]];
    for (k, run) in report.runs.iter().enumerate() {
        write_csv(&dir.join(format!("run_{k}_series.csv")), series_rows(&run.series))?;
        let run_dir = dir.join(format!("run_{k}"));
        fs::create_dir_all(&run_dir).map_err(|e| ExperimentError::io(&run_dir, e))?;
        for era in &run.eras {
            write_csv(&run_dir.join(format!("era_{}.csv", era.generation)), era_rows(era))?;
            for (y, row) in era.cells.iter().enumerate() {
                for (x, v) in row.iter().enumerate() {
                    if let Some(f) = v {
                        tera.push(vec![
                            k.to_string(),
                            era.generation.to_string(),
                            x.to_string(),
                            y.to_string(),
                            f.to_string(),
                        ]);
                    }
                }
            }
        }
    }
    write_csv(&dir.join("tera.csv"), tera)?;

    let (_, first) = &report.targets[0];
    let path = dir.join("target.graph.json");
    fs::write(&path, first.to_json() + "\n").map_err(|e| ExperimentError::io(&path, e))?;
    if report.targets.len() > 1 {
        for (label, g) in &report.targets {
            let path = dir.join(format!("target_{label}.graph.json"));
            fs::write(&path, g.to_json() + "\n").map_err(|e| ExperimentError::io(&path, e))?;
        }
    }
    Ok(())
}
