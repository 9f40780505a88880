//! The outer optimization loop.
//!
//! Each iteration queries the loss at `z_t` and at `Q` perturbed points,
//! verifies the decoded `z_t`, records it when valid, then takes a pseudo
//! gradient step (plain descent or zeroth-order Adam). Verification reuses
//! the base query, so a full iteration costs exactly `Q + 1` loss queries.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QmoError, Result};
use crate::loss::{Assessment, BatchLoss, ObjectiveConfig, QmoLoss};
use crate::oracle::OracleSuite;
use crate::rng::{stream, Role};
use crate::types::{LatentVector, Sequence};
use crate::zo::{self, EstimatorConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum OptimizerKind {
    #[serde(rename = "gd", alias = "zo_gd", alias = "zo-gd")]
    ZoGd,
    #[default]
    #[serde(rename = "adam", alias = "zo_adam", alias = "zo-adam")]
    ZoAdam,
}

/// Step size schedule for plain descent. Adam always uses `alpha0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepSchedule {
    #[default]
    Constant,
    /// `alpha0 / sqrt(t + 1)`
    InvSqrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdamParams {
    #[serde(default = "default_beta1")]
    pub beta1: f64,
    #[serde(default = "default_beta2")]
    pub beta2: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
}

fn default_beta1() -> f64 {
    0.9
}
fn default_beta2() -> f64 {
    0.999
}
fn default_eps() -> f64 {
    1e-8
}

impl Default for AdamParams {
    fn default() -> Self {
        AdamParams {
            beta1: default_beta1(),
            beta2: default_beta2(),
            eps: default_eps(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub optimizer: OptimizerKind,
    pub alpha0: f64,
    /// Iterations `T` per restart.
    pub iterations: usize,
    /// Directions `Q` per gradient estimate.
    pub queries: usize,
    pub beta: f64,
    pub restarts: usize,
    pub stop_on_first_success: bool,
    pub seed: u64,
    pub schedule: StepSchedule,
    pub adam: AdamParams,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            optimizer: OptimizerKind::ZoAdam,
            alpha0: 0.05,
            iterations: 20,
            queries: 50,
            beta: 10.0,
            restarts: 1,
            stop_on_first_success: false,
            seed: 0,
            schedule: StepSchedule::Constant,
            adam: AdamParams::default(),
        }
    }
}

impl SolverConfig {
    pub fn estimator(&self) -> EstimatorConfig {
        EstimatorConfig {
            queries: self.queries,
            beta: self.beta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.estimator().validate()?;
        if !(self.alpha0 > 0.0 && self.alpha0.is_finite()) {
            return Err(QmoError::Config(format!("alpha0 must be positive, got {}", self.alpha0)));
        }
        if self.iterations == 0 {
            return Err(QmoError::Config("T must be >= 1".into()));
        }
        if self.restarts == 0 {
            return Err(QmoError::Config("restarts must be >= 1".into()));
        }
        let a = &self.adam;
        if !(0.0..1.0).contains(&a.beta1) || !(0.0..1.0).contains(&a.beta2) || !(a.eps > 0.0) {
            return Err(QmoError::Config(
                "adam needs 0 <= beta1, beta2 < 1 and eps > 0".into(),
            ));
        }
        Ok(())
    }

    fn step_size(&self, t: usize) -> f64 {
        match self.schedule {
            StepSchedule::Constant => self.alpha0,
            StepSchedule::InvSqrt => self.alpha0 / ((t + 1) as f64).sqrt(),
        }
    }
}

/// `z − α·g`.
pub fn gd_step(z: &LatentVector, grad: &[f64], alpha: f64) -> Result<LatentVector> {
    if grad.len() != z.dim() {
        return Err(QmoError::Dimension { expected: z.dim(), got: grad.len() });
    }
    LatentVector::new(z.iter().zip(grad).map(|(x, g)| x - alpha * g).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
    pub params: AdamParams,
}

impl AdamState {
    pub fn new(dim: usize, params: AdamParams) -> Self {
        AdamState {
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            t: 0,
            params,
        }
    }
}

/// One zeroth-order Adam update with bias correction. The state only
/// advances when the new iterate is finite.
pub fn adam_step(state: &mut AdamState, z: &LatentVector, grad: &[f64], alpha0: f64) -> Result<LatentVector> {
    if grad.len() != z.dim() || state.m.len() != z.dim() {
        return Err(QmoError::Dimension { expected: z.dim(), got: grad.len() });
    }
    let AdamParams { beta1, beta2, eps } = state.params;
    let power = i32::try_from(state.t + 1).unwrap_or(i32::MAX);
    let c1 = 1.0 - beta1.powi(power);
    let c2 = 1.0 - beta2.powi(power);
    let mut m = state.m.clone();
    let mut v = state.v.clone();
    let mut next = Vec::with_capacity(z.dim());
    for i in 0..z.dim() {
        let g = grad[i];
        m[i] = beta1 * m[i] + (1.0 - beta1) * g;
        v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
        let m_hat = m[i] / c1;
        let v_hat = v[i] / c2;
        next.push(z[i] - alpha0 * m_hat / (v_hat.sqrt() + eps));
    }
    let next = LatentVector::new(next)?;
    state.m = m;
    state.v = v;
    state.t += 1;
    Ok(next)
}

/// One verified iterate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub restart: usize,
    pub iteration: usize,
    pub latent: LatentVector,
    pub sequence: Option<Sequence>,
    pub properties: Vec<f64>,
    pub similarities: Vec<f64>,
    pub loss: f64,
    pub score: f64,
    pub valid: bool,
}

impl Candidate {
    fn from_assessment(restart: usize, iteration: usize, latent: LatentVector, a: Assessment) -> Self {
        Candidate {
            restart,
            iteration,
            latent,
            sequence: a.sequence,
            properties: a.properties,
            similarities: a.similarities,
            loss: a.loss,
            score: a.score,
            valid: a.valid,
        }
    }
}

/// Highest score; ties go to the earliest iteration, then the lowest restart.
pub fn select_best(candidates: &[Candidate]) -> Result<&Candidate> {
    candidates
        .iter()
        .reduce(|best, c| {
            let better = c.score > best.score
                || (c.score == best.score
                    && (c.iteration, c.restart) < (best.iteration, best.restart));
            if better {
                c
            } else {
                best
            }
        })
        .ok_or(QmoError::NoSolution)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolutionSet {
    pub candidates: Vec<Candidate>,
    pub best: Option<Candidate>,
}

impl SolutionSet {
    /// Keeps the valid candidates and selects the best.
    pub fn from_candidates(candidates: impl IntoIterator<Item = Candidate>) -> Self {
        let candidates: Vec<Candidate> = candidates.into_iter().filter(|c| c.valid).collect();
        let best = select_best(&candidates).ok().cloned();
        SolutionSet { candidates, best }
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    StoppedOnSuccess { iteration: usize },
    Diverged { iteration: usize },
    Failed { iteration: usize, oracle: bool, error: String },
}

/// Everything one restart produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub restart: usize,
    pub status: RunStatus,
    /// Every verified iterate in order, valid or not.
    pub trajectory: Vec<Candidate>,
    /// Optimization steps taken.
    pub steps: usize,
    /// Loss queries consumed.
    pub evaluations: u64,
}

impl RunOutcome {
    pub fn success(&self) -> bool {
        self.trajectory.iter().any(|c| c.valid)
    }

    pub fn solutions(&self) -> SolutionSet {
        SolutionSet::from_candidates(self.trajectory.iter().cloned())
    }

    pub fn oracle_failed(&self) -> bool {
        matches!(self.status, RunStatus::Failed { oracle: true, .. })
    }
}

fn diverged(z: &LatentVector, start_norm: f64) -> bool {
    z.norm() > 1e6 * start_norm + 1e6
}

/// Runs `T` iterations from `z0`. Directions come from the stream for
/// `seed + restart`. Failures end the restart and are reported in the status.
pub fn run(loss: &dyn BatchLoss, cfg: &SolverConfig, z0: &LatentVector, restart: usize) -> Result<RunOutcome> {
    cfg.validate()?;
    z0.check_dim(loss.dim())?;
    let d = loss.dim();
    let est = cfg.estimator();
    let mut rng = stream(cfg.seed, Role::Directions, restart as u64);
    let mut adam = AdamState::new(d, cfg.adam);
    let start_norm = z0.norm();
    let mut z = z0.clone();
    let mut trajectory = Vec::new();
    let mut evaluations = 0u64;
    let mut steps = 0;
    let mut status = RunStatus::Completed;

    let fail = |iteration: usize, e: QmoError| RunStatus::Failed {
        iteration,
        oracle: e.is_oracle(),
        error: e.to_string(),
    };

    for t in 0..cfg.iterations {
        let dirs = zo::sample_directions(d, cfg.queries, &mut rng)?;
        let points = zo::perturbed_points(&z, cfg.beta, &dirs)?;

        // With early stopping the base point is verified before spending the
        // Q perturbation queries; otherwise all Q + 1 go out as one batch.
        let (base, perturbed) = if cfg.stop_on_first_success {
            let base = match loss.evaluate_batch(&[&z]) {
                Ok(mut v) => v.remove(0),
                Err(e) => {
                    status = fail(t, e);
                    break;
                }
            };
            evaluations += 1;
            if base.valid {
                trajectory.push(Candidate::from_assessment(restart, t, z.clone(), base));
                status = RunStatus::StoppedOnSuccess { iteration: t };
                break;
            }
            let refs: Vec<&LatentVector> = points.iter().collect();
            match loss.evaluate_batch(&refs) {
                Ok(v) => {
                    evaluations += v.len() as u64;
                    (base, v)
                }
                Err(e) => {
                    trajectory.push(Candidate::from_assessment(restart, t, z.clone(), base));
                    status = fail(t, e);
                    break;
                }
            }
        } else {
            let mut batch: Vec<&LatentVector> = Vec::with_capacity(cfg.queries + 1);
            batch.push(&z);
            batch.extend(points.iter());
            match loss.evaluate_batch(&batch) {
                Ok(mut v) => {
                    evaluations += v.len() as u64;
                    let rest = v.split_off(1);
                    (v.remove(0), rest)
                }
                Err(e) => {
                    status = fail(t, e);
                    break;
                }
            }
        };

        let base_loss = base.loss;
        trajectory.push(Candidate::from_assessment(restart, t, z.clone(), base));

        let values: Vec<f64> = perturbed.iter().map(|a| a.loss).collect();
        let grad = match zo::combine(base_loss, &values, &est, &dirs) {
            Ok(g) => g,
            Err(e) => {
                status = fail(t, e);
                break;
            }
        };
        let next = match cfg.optimizer {
            OptimizerKind::ZoGd => gd_step(&z, &grad, cfg.step_size(t)),
            OptimizerKind::ZoAdam => adam_step(&mut adam, &z, &grad, cfg.alpha0),
        };
        z = match next {
            Ok(next) => next,
            Err(_) => {
                status = fail(t, QmoError::NonFiniteUpdate { iteration: t });
                break;
            }
        };
        steps += 1;
        if diverged(&z, start_norm) {
            status = RunStatus::Diverged { iteration: t };
            break;
        }
    }

    Ok(RunOutcome {
        restart,
        status,
        trajectory,
        steps,
        evaluations,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestartReport {
    pub runs: Vec<RunOutcome>,
    pub solutions: SolutionSet,
}

impl RestartReport {
    /// `cumulative[k]`: some restart among the first `k + 1` succeeded.
    pub fn cumulative_success(&self) -> Vec<bool> {
        self.runs
            .iter()
            .scan(false, |acc, r| {
                *acc |= r.success();
                Some(*acc)
            })
            .collect()
    }

    pub fn success(&self) -> bool {
        !self.solutions.is_empty()
    }

    pub fn trajectory(&self) -> impl Iterator<Item = &Candidate> {
        self.runs.iter().flat_map(|r| r.trajectory.iter())
    }

    pub fn evaluations(&self) -> u64 {
        self.runs.iter().map(|r| r.evaluations).sum()
    }
}

/// Up to `cfg.restarts` runs from `z0`, each with its own direction stream.
/// With `stop_on_first_success` the restarts stop at the first success and
/// run sequentially; otherwise every restart runs (in parallel on the rayon
/// pool) and results are merged in restart order.
pub fn run_with_restarts(loss: &dyn BatchLoss, cfg: &SolverConfig, z0: &LatentVector) -> Result<RestartReport> {
    cfg.validate()?;
    let runs = if cfg.stop_on_first_success {
        let mut runs = Vec::new();
        for r in 0..cfg.restarts {
            let out = run(loss, cfg, z0, r)?;
            let done = out.success();
            runs.push(out);
            if done {
                break;
            }
        }
        runs
    } else {
        (0..cfg.restarts)
            .into_par_iter()
            .map(|r| run(loss, cfg, z0, r))
            .collect::<Result<Vec<_>>>()?
    };
    let solutions = SolutionSet::from_candidates(runs.iter().flat_map(|r| r.trajectory.iter().cloned()));
    Ok(RestartReport { runs, solutions })
}

/// Hyperparameter lists tried for one start; empty lists keep the base value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    #[serde(default)]
    pub beta: Vec<f64>,
    #[serde(default)]
    pub alpha0: Vec<f64>,
    /// Replaces every score coefficient.
    #[serde(default)]
    pub lambda: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSetting {
    pub beta: f64,
    pub alpha0: f64,
    pub lambda: Option<f64>,
}

impl SweepGrid {
    pub fn settings(&self, base: &SolverConfig) -> Vec<SweepSetting> {
        let betas = if self.beta.is_empty() { vec![base.beta] } else { self.beta.clone() };
        let alphas = if self.alpha0.is_empty() { vec![base.alpha0] } else { self.alpha0.clone() };
        let lambdas: Vec<Option<f64>> = if self.lambda.is_empty() {
            vec![None]
        } else {
            self.lambda.iter().copied().map(Some).collect()
        };
        let mut out = Vec::new();
        for &beta in &betas {
            for &alpha0 in &alphas {
                for &lambda in &lambdas {
                    out.push(SweepSetting { beta, alpha0, lambda });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub settings: Vec<SweepSetting>,
    pub reports: Vec<RestartReport>,
    /// All valid candidates, rescored with the base objective's coefficients.
    pub solutions: SolutionSet,
}

/// Runs every grid setting from the same start and selects one best
/// candidate across all of them.
pub fn sweep(
    objective: &ObjectiveConfig,
    suite: &OracleSuite,
    cfg: &SolverConfig,
    z0: &LatentVector,
    grid: &SweepGrid,
) -> Result<SweepReport> {
    let settings = grid.settings(cfg);
    let mut reports = Vec::with_capacity(settings.len());
    for s in &settings {
        let mut obj = objective.clone();
        if let Some(l) = s.lambda {
            obj.scores.iter_mut().for_each(|t| t.coefficient = l);
        }
        let run_cfg = SolverConfig {
            beta: s.beta,
            alpha0: s.alpha0,
            ..cfg.clone()
        };
        let loss = QmoLoss::new(&obj, suite)?;
        reports.push(run_with_restarts(&loss, &run_cfg, z0)?);
    }
    let rescored = reports.iter().flat_map(|r| r.solutions.candidates.iter()).map(|c| Candidate {
        score: objective.molecular_score(&c.properties, &c.similarities),
        ..c.clone()
    });
    let solutions = SolutionSet::from_candidates(rescored);
    Ok(SweepReport {
        settings,
        reports,
        solutions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::FnLoss;
    use proptest::prelude::*;

    fn lv(v: &[f64]) -> LatentVector {
        LatentVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn gd_step_examples() {
        let z = lv(&[1.0, 0.0]);
        assert_eq!(gd_step(&z, &[0.0, 0.0], 0.5).unwrap(), z);
        assert_eq!(gd_step(&z, &[2.0, 0.0], 0.5).unwrap(), lv(&[0.0, 0.0]));
        assert_eq!(gd_step(&z, &[3.0, -7.0], 0.0).unwrap(), z);
        assert!(gd_step(&z, &[f64::INFINITY, 0.0], 1.0).is_err());
    }

    #[test]
    fn adam_defaults() {
        let p = AdamParams::default();
        assert_eq!((p.beta1, p.beta2, p.eps), (0.9, 0.999, 1e-8));
    }

    #[test]
    fn adam_first_step_is_signed_alpha() {
        let mut s = AdamState::new(3, AdamParams::default());
        let z = lv(&[0.0, 1.0, -1.0]);
        let g = [2.0, -0.5, 0.0];
        let next = adam_step(&mut s, &z, &g, 0.1).unwrap();
        for i in 0..3 {
            let expected = z[i] - 0.1 * g[i] / (g[i].abs() + 1e-8);
            assert!((next[i] - expected).abs() < 1e-15);
        }
        assert!((next[0] + 0.1).abs() < 1e-8);
        assert_eq!(s.t, 1);
    }

    #[test]
    fn adam_zero_gradient_never_moves() {
        let mut s = AdamState::new(2, AdamParams::default());
        let mut z = lv(&[0.3, -0.2]);
        for _ in 0..10 {
            z = adam_step(&mut s, &z, &[0.0, 0.0], 1.0).unwrap();
        }
        assert_eq!(z, lv(&[0.3, -0.2]));
        assert!(s.v.iter().all(|&v| v >= 0.0));
    }

    fn cand(score: f64, iteration: usize, restart: usize) -> Candidate {
        Candidate {
            restart,
            iteration,
            latent: LatentVector::zeros(1),
            sequence: None,
            properties: vec![],
            similarities: vec![],
            loss: -score,
            score,
            valid: true,
        }
    }

    #[test]
    fn selection_examples() {
        let one = [cand(0.3, 2, 0)];
        assert_eq!(select_best(&one).unwrap(), &one[0]);
        let two = [cand(0.6, 1, 0), cand(0.8, 4, 0)];
        assert_eq!(select_best(&two).unwrap().score, 0.8);
        let tie = [cand(0.5, 9, 0), cand(0.5, 5, 0)];
        assert_eq!(select_best(&tie).unwrap().iteration, 5);
        let tie = [cand(0.5, 5, 2), cand(0.5, 5, 1)];
        assert_eq!(select_best(&tie).unwrap().restart, 1);
        assert!(matches!(select_best(&[]), Err(QmoError::NoSolution)));
    }

    proptest! {
        #[test]
        fn selection_is_scale_invariant(scores in proptest::collection::vec(-10.0..10.0f64, 1..20), c in 0.01..100.0f64) {
            let cands: Vec<Candidate> = scores.iter().enumerate().map(|(i, &s)| cand(s, i, 0)).collect();
            let scaled: Vec<Candidate> = scores.iter().enumerate().map(|(i, &s)| cand(s * c, i, 0)).collect();
            prop_assert_eq!(select_best(&cands).unwrap().iteration, select_best(&scaled).unwrap().iteration);
        }
    }

    fn quadratic(d: usize) -> impl Fn(&[f64]) -> f64 + Sync {
        move |z: &[f64]| z.iter().enumerate().map(|(i, x)| (x - (i as f64 + 1.0) / d as f64).powi(2)).sum()
    }

    #[test]
    fn query_count_is_t_times_q_plus_one() {
        let loss = FnLoss::new(6, -1.0, quadratic(6));
        let cfg = SolverConfig { iterations: 7, queries: 4, beta: 0.1, ..Default::default() };
        let out = run(&loss, &cfg, &LatentVector::zeros(6), 0).unwrap();
        assert_eq!(out.status, RunStatus::Completed);
        assert_eq!(out.evaluations, 7 * 5);
        assert_eq!(loss.evaluations(), 35);
        assert_eq!(out.trajectory.len(), 7);
        assert_eq!(out.steps, 7);
    }

    #[test]
    fn already_valid_start_stops_immediately() {
        let loss = FnLoss::new(3, 10.0, quadratic(3));
        let cfg = SolverConfig { stop_on_first_success: true, iterations: 50, queries: 5, ..Default::default() };
        let out = run(&loss, &cfg, &LatentVector::zeros(3), 0).unwrap();
        assert_eq!(out.status, RunStatus::StoppedOnSuccess { iteration: 0 });
        assert_eq!(out.steps, 0);
        assert_eq!(out.evaluations, 1);
        assert_eq!(out.trajectory.len(), 1);
    }

    #[test]
    fn restart_stops_after_success() {
        let loss = FnLoss::new(3, 10.0, quadratic(3));
        let cfg = SolverConfig { stop_on_first_success: true, restarts: 5, queries: 3, ..Default::default() };
        let rep = run_with_restarts(&loss, &cfg, &LatentVector::zeros(3)).unwrap();
        assert_eq!(rep.runs.len(), 1);
        assert_eq!(rep.cumulative_success(), vec![true]);
    }

    #[test]
    fn divergence_guard_trips() {
        // Linear loss with a huge step walks off to infinity.
        let loss = FnLoss::new(2, f64::NEG_INFINITY, |z: &[f64]| 1e3 * z[0]);
        let cfg = SolverConfig {
            optimizer: OptimizerKind::ZoGd,
            alpha0: 1e6,
            iterations: 100,
            queries: 2,
            beta: 1.0,
            ..Default::default()
        };
        let out = run(&loss, &cfg, &LatentVector::zeros(2), 0).unwrap();
        assert!(matches!(out.status, RunStatus::Diverged { .. }), "{:?}", out.status);
    }

    #[test]
    fn non_finite_loss_aborts_restart() {
        let loss = FnLoss::new(2, -1.0, |z: &[f64]| if z[0] > 0.0 { f64::NAN } else { 0.0 });
        let cfg = SolverConfig { queries: 8, beta: 0.5, ..Default::default() };
        let out = run(&loss, &cfg, &LatentVector::zeros(2), 0).unwrap();
        assert!(matches!(out.status, RunStatus::Failed { oracle: false, iteration: 0, .. }));
    }

    #[test]
    fn reproducible_bitwise() {
        let loss = FnLoss::new(5, 0.01, quadratic(5));
        let cfg = SolverConfig { iterations: 30, queries: 6, beta: 0.05, restarts: 3, seed: 42, ..Default::default() };
        let a = run_with_restarts(&loss, &cfg, &LatentVector::zeros(5)).unwrap();
        let b = run_with_restarts(&loss, &cfg, &LatentVector::zeros(5)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.runs[0].trajectory, a.runs[1].trajectory);
    }

    #[test]
    fn inv_sqrt_schedule() {
        let cfg = SolverConfig { alpha0: 2.0, schedule: StepSchedule::InvSqrt, ..Default::default() };
        assert_eq!(cfg.step_size(0), 2.0);
        assert_eq!(cfg.step_size(3), 1.0);
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig { alpha0: 0.0, ..Default::default() }.validate().is_err());
        assert!(SolverConfig { iterations: 0, ..Default::default() }.validate().is_err());
        assert!(SolverConfig { queries: 0, ..Default::default() }.validate().is_err());
        assert!(SolverConfig { restarts: 0, ..Default::default() }.validate().is_err());
        assert!(SolverConfig::default().validate().is_ok());
    }
}
