//! End-to-end jobs behind the command-line front end: each builds the
//! problem from a [`RunConfig`], runs it, and returns its artifacts in memory.
//! Writing them is left to the caller.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use crate::config::{Prepared, QmoSetup, RunConfig, Start};
use crate::error::{QmoError, Result};
use crate::landscape::{self, GridMode, PROJECTION_CONVENTION};
use crate::loss::{BatchLoss, QmoLoss};
use crate::oracle::QueryCounts;
use crate::report::{self, Metadata, Provenance, SolutionsDoc, StabilityRow};
use crate::rng::{stream, Role};
use crate::solver::{run_with_restarts, sweep, Candidate, RestartReport, SolutionSet, SolverConfig};
use crate::types::LatentVector;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JobStatus {
    Solved,
    NoSolution,
    OracleFailure(String),
}

impl JobStatus {
    pub fn exit_code(&self) -> i32 {
        match self {
            JobStatus::Solved => 0,
            JobStatus::NoSolution => 3,
            JobStatus::OracleFailure(_) => 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct JobOutput {
    /// `(file name, contents)` in write order.
    pub artifacts: Vec<(String, Vec<u8>)>,
    pub status: JobStatus,
    pub summary: Vec<String>,
}

impl JobOutput {
    pub fn artifact(&self, name: &str) -> Option<&[u8]> {
        self.artifacts.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_slice())
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        for (name, bytes) in &self.artifacts {
            report::write_artifact(dir, name, bytes)?;
        }
        Ok(())
    }
}

/// Exit code for an error raised before or outside a run.
pub fn error_exit_code(e: &QmoError) -> i32 {
    if e.is_oracle() {
        2
    } else {
        1
    }
}

fn provenance(cfg: &RunConfig) -> Provenance {
    Provenance {
        config_sha256: cfg.hash(),
        seed: cfg.seed,
    }
}

fn metadata(cfg: &RunConfig, command: &str, counts: QueryCounts, started: Instant) -> Metadata {
    Metadata {
        command: command.to_string(),
        provenance: provenance(cfg),
        query_counts: counts,
        wall_time_secs: started.elapsed().as_secs_f64(),
        log_base: "natural".to_string(),
        projection_convention: PROJECTION_CONVENTION.to_string(),
        final_losses: Vec::new(),
        notes: Vec::new(),
    }
}

/// One start of a QMO problem with its restarts.
pub fn solve_start(setup: &QmoSetup, start: &Start, cfg: &SolverConfig) -> Result<RestartReport> {
    let objective = setup.objective_for(start);
    let loss = QmoLoss::new(&objective, &setup.suite)?;
    run_with_restarts(&loss, cfg, &start.latent)
}

fn oracle_failure<'a>(reports: impl IntoIterator<Item = &'a RestartReport>) -> Option<String> {
    reports.into_iter().flat_map(|r| &r.runs).find_map(|r| match &r.status {
        crate::solver::RunStatus::Failed { oracle: true, error, .. } => Some(error.clone()),
        _ => None,
    })
}

/// Single optimization (or a hyperparameter sweep when `[sweep]` is set)
/// from the first configured start.
pub fn run_job(cfg: &RunConfig) -> Result<JobOutput> {
    let started = Instant::now();
    let prov = provenance(cfg);
    let solver = cfg.solver_config();
    let prepared = cfg.prepare()?;

    let (reports, solutions, props, sims, start_seq, z0, counts, mut notes): (
        Vec<RestartReport>,
        SolutionSet,
        Vec<String>,
        Vec<String>,
        Option<String>,
        LatentVector,
        QueryCounts,
        Vec<String>,
    ) = match &prepared {
        Prepared::Qmo(setup) => {
            let start = &setup.starts[0];
            let objective = setup.objective_for(start);
            let (reports, solutions, notes) = match &cfg.sweep {
                Some(grid) => {
                    let rep = sweep(&objective, &setup.suite, &solver, &start.latent, grid)?;
                    let notes = rep
                        .settings
                        .iter()
                        .enumerate()
                        .map(|(i, s)| {
                            format!(
                                "sweep setting {i}: beta={} alpha0={} lambda={:?}, restarts {}..{}",
                                s.beta,
                                s.alpha0,
                                s.lambda,
                                i * solver.restarts,
                                (i + 1) * solver.restarts
                            )
                        })
                        .collect();
                    let reports = renumber(rep.reports, solver.restarts);
                    // Re-select so restart numbers match the renumbered trajectory.
                    let rescored: Vec<Candidate> = reports
                        .iter()
                        .flat_map(|r| r.trajectory())
                        .filter(|c| c.valid)
                        .map(|c| Candidate {
                            score: objective.molecular_score(&c.properties, &c.similarities),
                            ..c.clone()
                        })
                        .collect();
                    (reports, SolutionSet::from_candidates(rescored), notes)
                }
                None => {
                    let rep = solve_start(setup, start, &solver)?;
                    let sol = rep.solutions.clone();
                    (vec![rep], sol, Vec::new())
                }
            };
            (
                reports,
                solutions,
                objective.property_names(),
                objective.similarity_names(),
                start.sequence.as_ref().map(|s| s.to_string()),
                start.latent.clone(),
                setup.suite.snapshot_query_counts(),
                notes,
            )
        }
        Prepared::Smooth {
            problem,
            success_below,
            z0,
        } => {
            let loss = problem.as_loss(*success_below);
            let rep = run_with_restarts(&loss, &solver, z0)?;
            let counts = QueryCounts {
                loss_evaluations: loss.evaluations(),
                ..QueryCounts::default()
            };
            let sol = rep.solutions.clone();
            let notes = vec![format!("valid iff loss <= {success_below}")];
            (vec![rep], sol, Vec::new(), Vec::new(), None, z0.clone(), counts, notes)
        }
    };

    let trajectory: Vec<Candidate> = reports.iter().flat_map(|r| r.trajectory().cloned()).collect();
    let mut meta = metadata(cfg, "run", counts, started);
    meta.final_losses = reports
        .iter()
        .flat_map(|r| &r.runs)
        .filter_map(|r| r.trajectory.last().map(|c| c.loss))
        .collect();
    let failure = oracle_failure(&reports);
    if let Some(e) = &failure {
        notes.push(format!("oracle failure: {e}"));
    }
    meta.notes = notes;

    let doc = SolutionsDoc::new(&prov, start_seq, z0.into_inner(), &trajectory, props.clone(), sims.clone(), &solutions);
    let status = match failure {
        Some(e) => JobStatus::OracleFailure(e),
        None if solutions.is_empty() => JobStatus::NoSolution,
        None => JobStatus::Solved,
    };
    let mut summary = vec![format!(
        "{} iterates, {} valid, {} loss evaluations",
        trajectory.len(),
        solutions.candidates.len(),
        reports.iter().map(|r| r.evaluations()).sum::<u64>()
    )];
    if let Some(b) = &solutions.best {
        summary.push(format!(
            "best: restart {} iter {} loss {} score {}{}",
            b.restart,
            b.iteration,
            b.loss,
            b.score,
            b.sequence.as_ref().map(|s| format!(" sequence {s}")).unwrap_or_default()
        ));
    }
    Ok(JobOutput {
        artifacts: vec![
            (
                report::TRAJECTORY_CSV.into(),
                report::trajectory_csv(&prov, &props, &sims, &trajectory).into_bytes(),
            ),
            (report::TRAJECTORY_LATENTS.into(), report::latent_bytes(&trajectory)),
            (report::SOLUTIONS_JSON.into(), doc.to_json().into_bytes()),
            (report::METADATA_JSON.into(), meta.to_json().into_bytes()),
        ],
        status,
        summary,
    })
}

fn renumber(reports: Vec<RestartReport>, per_setting: usize) -> Vec<RestartReport> {
    reports
        .into_iter()
        .enumerate()
        .map(|(i, mut rep)| {
            for run in &mut rep.runs {
                run.restart += i * per_setting;
                for c in &mut run.trajectory {
                    c.restart += i * per_setting;
                }
            }
            rep
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StabilitySweep {
    /// Cumulative success after the first `r` restarts, for each `r`.
    Restarts(Vec<usize>),
    /// One full run per `Q` value.
    Queries(Vec<usize>),
}

pub const STABILITY_CSV: &str = "stability.csv";

/// Success counts over every configured start for each sweep setting.
pub fn stability_rows(cfg: &RunConfig, prepared: &Prepared, sweep: &StabilitySweep) -> Result<Vec<StabilityRow>> {
    let base = cfg.solver_config();
    let runs: Vec<(String, SolverConfig)> = match sweep {
        StabilitySweep::Restarts(list) => {
            if list.is_empty() || list.contains(&0) {
                return Err(QmoError::Config("restarts list must be nonempty and positive".into()));
            }
            let max = *list.iter().max().expect("nonempty");
            vec![(
                String::new(),
                SolverConfig {
                    restarts: max,
                    stop_on_first_success: true,
                    ..base
                },
            )]
        }
        StabilitySweep::Queries(list) => {
            if list.is_empty() {
                return Err(QmoError::Config("Q list must be nonempty".into()));
            }
            list.iter()
                .map(|&q| (format!("Q={q}"), SolverConfig { queries: q, ..base.clone() }))
                .collect()
        }
    };
    let mut rows = Vec::new();
    for (label, solver) in runs {
        solver.validate()?;
        let reports: Vec<RestartReport> = match prepared {
            Prepared::Qmo(setup) => setup
                .starts
                .par_iter()
                .map(|s| solve_start(setup, s, &solver))
                .collect::<Result<_>>()?,
            Prepared::Smooth {
                problem,
                success_below,
                z0,
            } => vec![run_with_restarts(&problem.as_loss(*success_below), &solver, z0)?],
        };
        if let Some(e) = oracle_failure(&reports) {
            return Err(QmoError::oracle(e));
        }
        match sweep {
            StabilitySweep::Restarts(list) => {
                // Runs stop at the first success, so a short curve ends in it.
                let curves: Vec<Vec<bool>> = reports.iter().map(|rep| rep.cumulative_success()).collect();
                for &r in list {
                    let successes = curves
                        .iter()
                        .filter(|c| c.get(r - 1).or(c.last()).copied().unwrap_or(false))
                        .count();
                    rows.push(StabilityRow {
                        setting: format!("restarts={r}"),
                        starts: reports.len(),
                        successes,
                    });
                }
            }
            StabilitySweep::Queries(_) => rows.push(StabilityRow {
                setting: label,
                starts: reports.len(),
                successes: reports.iter().filter(|r| r.success()).count(),
            }),
        }
    }
    Ok(rows)
}

pub fn stability_job(cfg: &RunConfig, sweep: &StabilitySweep) -> Result<JobOutput> {
    let started = Instant::now();
    let prov = provenance(cfg);
    let prepared = cfg.prepare()?;
    let rows = stability_rows(cfg, &prepared, sweep)?;
    let counts = match &prepared {
        Prepared::Qmo(setup) => setup.suite.snapshot_query_counts(),
        Prepared::Smooth { .. } => QueryCounts::default(),
    };
    let meta = metadata(cfg, "stability", counts, started);
    let summary = rows
        .iter()
        .map(|r| format!("{}: {}/{} ({:.3})", r.setting, r.successes, r.starts, r.rate()))
        .collect();
    let any = rows.iter().any(|r| r.successes > 0);
    Ok(JobOutput {
        artifacts: vec![
            (STABILITY_CSV.into(), report::stability_csv(&prov, &rows).into_bytes()),
            (report::METADATA_JSON.into(), meta.to_json().into_bytes()),
        ],
        status: if any { JobStatus::Solved } else { JobStatus::NoSolution },
        summary,
    })
}

/// Reads the trajectory rows named by `doc.best_rows` from a latent file.
pub fn best_trajectory(doc: &SolutionsDoc, latents: &[u8]) -> Result<Vec<LatentVector>> {
    let d = doc.dim;
    if d == 0 || latents.len() != doc.rows * d * 8 {
        return Err(QmoError::Config(format!(
            "latent file holds {} bytes, expected {} rows of d = {d}",
            latents.len(),
            doc.rows
        )));
    }
    let [begin, end] = doc.best_rows.unwrap_or([0, 0]);
    latents[begin * d * 8..end * d * 8]
        .chunks_exact(d * 8)
        .map(|row| {
            LatentVector::new(
                row.chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                    .collect(),
            )
        })
        .collect()
}

#[derive(Debug, Clone, Default)]
pub struct LandscapeOptions {
    pub mode: Option<GridMode>,
    pub grids: Option<usize>,
}

pub fn grid_file_name(mode: GridMode, index: usize) -> String {
    match mode {
        GridMode::Principal => format!("landscape_principal_{index}.csv"),
        GridMode::Random => format!("landscape_random_{index}.csv"),
    }
}

pub fn projection_file_name(mode: GridMode, index: usize) -> String {
    match mode {
        GridMode::Principal => format!("projection_principal_{index}.csv"),
        GridMode::Random => format!("projection_random_{index}.csv"),
    }
}

/// Grids around the solution in `doc` plus the projected best trajectory.
pub fn landscape_job(
    cfg: &RunConfig,
    doc: &SolutionsDoc,
    trajectory: &[LatentVector],
    opts: &LandscapeOptions,
) -> Result<JobOutput> {
    let started = Instant::now();
    let prov = provenance(cfg);
    let mode = opts.mode.unwrap_or(cfg.landscape.mode);
    let grids = opts.grids.unwrap_or(cfg.landscape.grids);
    if grids == 0 {
        return Err(QmoError::Config("landscape needs at least one grid".into()));
    }
    let z0 = LatentVector::new(doc.z0.clone())?;
    let z_star = doc.z_star();
    if mode == GridMode::Principal && z_star.is_none() {
        return Err(QmoError::Config("solution file has no z* (no valid candidate); principal grid needs one".into()));
    }
    let Prepared::Qmo(setup) = cfg.prepare()? else {
        return Err(QmoError::Config("landscape needs a sequence oracle (codebook or command)".into()));
    };
    let start = setup
        .starts
        .iter()
        .find(|s| s.latent == z0)
        .cloned()
        .unwrap_or_else(|| Start {
            sequence: doc.start_sequence.as_deref().map(crate::types::Sequence::new).transpose().ok().flatten(),
            latent: z0.clone(),
        });
    let objective = setup.objective_for(&start);
    let (xa, ya) = cfg.landscape.axes_for(mode)?;

    let mut artifacts = Vec::new();
    let mut summary = Vec::new();
    for i in 0..grids {
        let mut rng = stream(cfg.seed, Role::Landscape, i as u64);
        let grid = match mode {
            GridMode::Principal => landscape::principal_grid(&z0, z_star.expect("checked"), xa.clone(), ya.clone(), &mut rng)?,
            GridMode::Random => landscape::random_grid(&z0, xa.clone(), ya.clone(), &mut rng)?,
        };
        let cells = landscape::evaluate_grid(&grid, &objective, &setup.suite)?;
        let points = landscape::project_trajectory(trajectory, &grid)?;
        let rows: Vec<(usize, f64, f64)> = points.into_iter().enumerate().map(|(t, (x, y))| (t, x, y)).collect();
        summary.push(format!(
            "grid {i}: {} cells, {} valid",
            cells.len(),
            cells.iter().filter(|c| c.valid).count()
        ));
        artifacts.push((
            grid_file_name(mode, i),
            report::grid_csv(&prov, &objective.property_names(), &objective.similarity_names(), &cells).into_bytes(),
        ));
        artifacts.push((projection_file_name(mode, i), report::projection_csv(&prov, &rows).into_bytes()));
    }
    let meta = metadata(cfg, "landscape", setup.suite.snapshot_query_counts(), started);
    artifacts.push(("landscape_metadata.json".into(), meta.to_json().into_bytes()));
    Ok(JobOutput {
        artifacts,
        status: JobStatus::Solved,
        summary,
    })
}
