use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use story_core::{Archive, NarrativeGraph};

use crate::config::{ExperimentConfig, CHECKPOINT_INTERVAL};
use crate::error::ExperimentError;
use crate::metrics::{EraMatrix, Recorder, RunMetrics, SeriesRow, Summary};
use crate::report::export_report;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub metrics: RunMetrics,
    pub series: Vec<SeriesRow>,
    pub eras: Vec<EraMatrix>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub targets: Vec<(String, NarrativeGraph)>,
    pub runs: Vec<RunResult>,
    pub summary: Summary,
}

/// Saved state of one run, written every [`CHECKPOINT_INTERVAL`] generations.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct Checkpoint {
    config: ExperimentConfig,
    run: usize,
    step: usize,
    archive: Archive,
    recorder: Recorder,
    eras: Vec<EraMatrix>,
}

fn checkpoint_path(dir: &Path, run: usize) -> PathBuf {
    dir.join(format!("run_{run}.checkpoint.json"))
}

fn load_checkpoint(dir: &Path, config: &ExperimentConfig, run: usize) -> Result<Option<Checkpoint>, ExperimentError> {
    let path = checkpoint_path(dir, run);
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(&path).map_err(|e| ExperimentError::io(&path, e))?;
    let cp: Checkpoint = serde_json::from_str(&text).map_err(|e| ExperimentError::Checkpoint {
        path: path.clone(),
        message: e.to_string(),
    })?;
    // A run may be extended: only the generation count is allowed to grow.
    let mut cp = cp;
    let same = ExperimentConfig {
        generations: config.generations,
        ..cp.config.clone()
    } == *config;
    if !same || cp.run != run || cp.archive.generation() > config.generations {
        return Err(ExperimentError::Checkpoint {
            path,
            message: "written by a different configuration".into(),
        });
    }
    cp.config = config.clone();
    Ok(Some(cp))
}

fn save_checkpoint(dir: &Path, cp: &Checkpoint) -> Result<(), ExperimentError> {
    let path = checkpoint_path(dir, cp.run);
    let tmp = path.with_extension("json.tmp");
    let text = serde_json::to_string(cp).expect("checkpoints serialize");
    fs::write(&tmp, text).map_err(|e| ExperimentError::io(&tmp, e))?;
    fs::rename(&tmp, &path).map_err(|e| ExperimentError::io(&path, e))
}

/// Runs (or resumes) one seeded search. Checkpoints go to `checkpoints`
/// when given.
pub fn run_single(
    config: &ExperimentConfig,
    run: usize,
    checkpoints: Option<&Path>,
) -> Result<RunResult, ExperimentError> {
    let schedule = config.target.schedule();
    let resumed = match checkpoints {
        Some(dir) => load_checkpoint(dir, config, run)?,
        None => None,
    };
    let mut cp = match resumed {
        Some(cp) => cp,
        None => {
            let archive = Archive::new(config.archive_config(run), schedule[0].1.clone());
            let mut recorder = Recorder::default();
            recorder.record(&archive, 0, None);
            Checkpoint {
                config: config.clone(),
                run,
                step: 0,
                archive,
                recorder,
                eras: Vec::new(),
            }
        }
    };

    while cp.archive.generation() < config.generations {
        let generation = cp.archive.generation() + 1;
        let step = config.step_at(generation);
        if step != cp.step {
            cp.archive.inject_target(schedule[step].1.clone());
            cp.step = step;
        }
        let bred = cp.archive.step_generation();
        cp.recorder.record(&cp.archive, step, Some(&bred));
        let last = generation == config.generations;
        if generation % CHECKPOINT_INTERVAL == 0 || last {
            cp.eras.push(EraMatrix::capture(&cp.archive, run));
            if let Some(dir) = checkpoints {
                save_checkpoint(dir, &cp)?;
            }
        }
    }

    let series = cp.recorder.into_rows();
    Ok(RunResult {
        metrics: RunMetrics::from_series(run, config.run_seed(run), &series, schedule.len()),
        series,
        eras: cp.eras,
    })
}

/// Runs every configured seed in parallel and, when `out` is given, resumes
/// from and writes checkpoints there before exporting the report.
pub fn run_experiment(config: &ExperimentConfig, out: Option<&Path>) -> Result<ExperimentReport, ExperimentError> {
    config.validate()?;
    let checkpoints = match out {
        Some(dir) => {
            let cp = dir.join("checkpoints");
            fs::create_dir_all(&cp).map_err(|e| ExperimentError::io(&cp, e))?;
            Some(cp)
        }
        None => None,
    };
    let runs = (0..config.runs)
        .into_par_iter()
        .map(|k| run_single(config, k, checkpoints.as_deref()))
        .collect::<Result<Vec<_>, _>>()?;
    let metrics: Vec<RunMetrics> = runs.iter().map(|r| r.metrics.clone()).collect();
    let report = ExperimentReport {
        summary: Summary::new(
            config.target.label(),
            config.dims.name().to_owned(),
            config.constraints_enabled,
            config.generations,
            &metrics,
        ),
        targets: config.target.schedule(),
        config: config.clone(),
        runs,
    };
    if let Some(dir) = out {
        export_report(&report, dir)?;
    }
    Ok(report)
}
