//! The two scalarized objectives.
//!
//! Case I (satisfy properties, maximize similarity):
//! `Σ_i hinge(f_i(x), τ_i) − Σ_j λ_j g_j(x | S)`.
//!
//! Case II (satisfy similarity, maximize properties):
//! `Σ_j hinge(g_j(x | S), η_j) − Σ_i γ_i f_i(x)`.
//!
//! `x = Dec(z)` is decoded once per evaluation and shared by every term.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{QmoError, Result};
use crate::oracle::OracleSuite;
use crate::types::{LatentVector, ReferenceSet, Sequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    #[default]
    AtLeast,
    AtMost,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LossMode {
    #[serde(rename = "case_i")]
    CaseI,
    #[serde(rename = "case_ii")]
    CaseII,
}

/// A threshold on a property (Case I) or a similarity (Case II).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constraint {
    pub name: String,
    pub threshold: f64,
    #[serde(default)]
    pub direction: Direction,
}

impl Constraint {
    pub fn at_least(name: impl Into<String>, threshold: f64) -> Self {
        Constraint {
            name: name.into(),
            threshold,
            direction: Direction::AtLeast,
        }
    }

    pub fn at_most(name: impl Into<String>, threshold: f64) -> Self {
        Constraint {
            name: name.into(),
            threshold,
            direction: Direction::AtMost,
        }
    }

    pub fn holds(&self, value: f64) -> bool {
        match self.direction {
            Direction::AtLeast => value >= self.threshold,
            Direction::AtMost => value <= self.threshold,
        }
    }
}

/// A positively weighted score term: `λ_j g_j` (Case I) or `γ_i f_i` (Case II).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreTerm {
    pub name: String,
    pub coefficient: f64,
}

impl ScoreTerm {
    pub fn new(name: impl Into<String>, coefficient: f64) -> Self {
        ScoreTerm {
            name: name.into(),
            coefficient,
        }
    }
}

/// `max(τ − value, 0)` for at-least, `max(value − τ, 0)` for at-most.
pub fn hinge(value: f64, threshold: f64, direction: Direction) -> Result<f64> {
    if !value.is_finite() || !threshold.is_finite() {
        return Err(QmoError::Domain(format!(
            "hinge inputs must be finite (value {value}, threshold {threshold})"
        )));
    }
    Ok(match direction {
        Direction::AtLeast => (threshold - value).max(0.0),
        Direction::AtMost => (value - threshold).max(0.0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveConfig {
    pub mode: LossMode,
    pub constraints: Vec<Constraint>,
    pub scores: Vec<ScoreTerm>,
    pub refs: ReferenceSet,
}

impl ObjectiveConfig {
    pub fn new(
        mode: LossMode,
        constraints: Vec<Constraint>,
        scores: Vec<ScoreTerm>,
        refs: ReferenceSet,
    ) -> Result<Self> {
        let cfg = ObjectiveConfig {
            mode,
            constraints,
            scores,
            refs,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.constraints.is_empty() {
            return Err(QmoError::Config("objective needs at least one constraint".into()));
        }
        if self.scores.is_empty() {
            return Err(QmoError::Config("objective needs at least one score term".into()));
        }
        if let Some(c) = self.constraints.iter().find(|c| !c.threshold.is_finite()) {
            return Err(QmoError::Config(format!("threshold of {:?} is not finite", c.name)));
        }
        if let Some(s) = self.scores.iter().find(|s| !(s.coefficient > 0.0 && s.coefficient.is_finite())) {
            return Err(QmoError::Config(format!(
                "coefficient of {:?} must be positive and finite (got {})",
                s.name, s.coefficient
            )));
        }
        Ok(())
    }

    /// Checks every referenced oracle name against the suite.
    pub fn check_names(&self, suite: &OracleSuite) -> Result<()> {
        for name in self.property_names() {
            if !suite.has_property(&name) {
                return Err(QmoError::Config(format!("unknown property oracle {name:?}")));
            }
        }
        for name in self.similarity_names() {
            if !suite.has_similarity(&name) {
                return Err(QmoError::Config(format!("unknown similarity oracle {name:?}")));
            }
        }
        Ok(())
    }

    fn property_terms(&self) -> Vec<&str> {
        match self.mode {
            LossMode::CaseI => self.constraints.iter().map(|c| c.name.as_str()).collect(),
            LossMode::CaseII => self.scores.iter().map(|s| s.name.as_str()).collect(),
        }
    }

    fn similarity_terms(&self) -> Vec<&str> {
        match self.mode {
            LossMode::CaseI => self.scores.iter().map(|s| s.name.as_str()).collect(),
            LossMode::CaseII => self.constraints.iter().map(|c| c.name.as_str()).collect(),
        }
    }

    /// Distinct property oracles used, in first-use order.
    pub fn property_names(&self) -> Vec<String> {
        dedup(self.property_terms())
    }

    /// Distinct similarity oracles used, in first-use order.
    pub fn similarity_names(&self) -> Vec<String> {
        dedup(self.similarity_terms())
    }

    fn constrained_values<'v>(&self, props: &'v [f64], sims: &'v [f64]) -> (Vec<String>, &'v [f64]) {
        match self.mode {
            LossMode::CaseI => (self.property_names(), props),
            LossMode::CaseII => (self.similarity_names(), sims),
        }
    }

    fn scored_values<'v>(&self, props: &'v [f64], sims: &'v [f64]) -> (Vec<String>, &'v [f64]) {
        match self.mode {
            LossMode::CaseI => (self.similarity_names(), sims),
            LossMode::CaseII => (self.property_names(), props),
        }
    }

    /// Hinge part of the loss. `props`/`sims` follow `property_names()` / `similarity_names()`.
    pub fn constraint_loss(&self, props: &[f64], sims: &[f64]) -> Result<f64> {
        let (names, values) = self.constrained_values(props, sims);
        self.constraints.iter().try_fold(0.0, |acc, c| {
            let v = values[position(&names, &c.name)];
            Ok(acc + hinge(v, c.threshold, c.direction)?)
        })
    }

    /// The molecular score to maximize: `Σ λ_j g_j` (Case I) or `Σ γ_i f_i` (Case II).
    pub fn molecular_score(&self, props: &[f64], sims: &[f64]) -> f64 {
        let (names, values) = self.scored_values(props, sims);
        self.scores
            .iter()
            .map(|s| s.coefficient * values[position(&names, &s.name)])
            .sum()
    }

    pub fn satisfied(&self, props: &[f64], sims: &[f64]) -> bool {
        let (names, values) = self.constrained_values(props, sims);
        self.constraints
            .iter()
            .all(|c| c.holds(values[position(&names, &c.name)]))
    }

    pub fn loss_from_values(&self, props: &[f64], sims: &[f64]) -> Result<f64> {
        Ok(self.constraint_loss(props, sims)? - self.molecular_score(props, sims))
    }

    /// Scores already-decoded sequences. Does not touch the decoder.
    pub fn assess_sequences(&self, xs: &[&Sequence], suite: &OracleSuite) -> Result<Vec<Assessment>> {
        let prop_names = self.property_names();
        let sim_names = self.similarity_names();
        let props = prop_names
            .iter()
            .map(|n| suite.property_batch(n, xs))
            .collect::<Result<Vec<_>>>()?;
        let sims = sim_names
            .iter()
            .map(|n| suite.similarity_batch(n, xs, &self.refs))
            .collect::<Result<Vec<_>>>()?;
        xs.iter()
            .enumerate()
            .map(|(k, x)| {
                let p: Vec<f64> = props.iter().map(|col| col[k]).collect();
                let s: Vec<f64> = sims.iter().map(|col| col[k]).collect();
                Ok(Assessment {
                    sequence: Some((*x).clone()),
                    loss: self.loss_from_values(&p, &s)?,
                    valid: self.satisfied(&p, &s),
                    score: self.molecular_score(&p, &s),
                    properties: p,
                    similarities: s,
                })
            })
            .collect()
    }

    /// One decode per point, then every term on the decoded batch. Each
    /// point counts as one loss evaluation.
    pub fn assess_batch(&self, zs: &[&LatentVector], suite: &OracleSuite) -> Result<Vec<Assessment>> {
        let xs = suite.decode_batch(zs)?;
        suite.record_loss_evaluations(zs.len() as u64);
        let refs: Vec<&Sequence> = xs.iter().collect();
        self.assess_sequences(&refs, suite)
    }
}

fn dedup(names: Vec<&str>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for n in names {
        if !out.iter().any(|o| o == n) {
            out.push(n.to_owned());
        }
    }
    out
}

fn position(names: &[String], name: &str) -> usize {
    names.iter().position(|n| n == name).expect("name from this objective")
}

/// Everything learned from one loss evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assessment {
    pub sequence: Option<Sequence>,
    pub properties: Vec<f64>,
    pub similarities: Vec<f64>,
    pub loss: f64,
    pub valid: bool,
    pub score: f64,
}

/// A loss the solver can query in batches.
pub trait BatchLoss: Sync {
    fn dim(&self) -> usize;
    fn property_names(&self) -> Vec<String>;
    fn similarity_names(&self) -> Vec<String>;
    fn evaluate_batch(&self, zs: &[&LatentVector]) -> Result<Vec<Assessment>>;
    /// Loss evaluations consumed so far.
    fn evaluations(&self) -> u64;
}

/// The Case I / Case II loss over an oracle suite.
#[derive(Debug, Clone, Copy)]
pub struct QmoLoss<'a> {
    pub objective: &'a ObjectiveConfig,
    pub suite: &'a OracleSuite,
}

impl<'a> QmoLoss<'a> {
    pub fn new(objective: &'a ObjectiveConfig, suite: &'a OracleSuite) -> Result<Self> {
        objective.validate()?;
        objective.check_names(suite)?;
        Ok(QmoLoss { objective, suite })
    }
}

impl BatchLoss for QmoLoss<'_> {
    fn dim(&self) -> usize {
        self.suite.dim()
    }

    fn property_names(&self) -> Vec<String> {
        self.objective.property_names()
    }

    fn similarity_names(&self) -> Vec<String> {
        self.objective.similarity_names()
    }

    fn evaluate_batch(&self, zs: &[&LatentVector]) -> Result<Vec<Assessment>> {
        self.objective.assess_batch(zs, self.suite)
    }

    fn evaluations(&self) -> u64 {
        self.suite.snapshot_query_counts().loss_evaluations
    }
}

/// A plain closure-backed loss with no oracles behind it; valid when the
/// loss is at or below `success_below`.
pub struct FnLoss<F> {
    dim: usize,
    f: F,
    success_below: f64,
    count: AtomicU64,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnLoss<F> {
    pub fn new(dim: usize, success_below: f64, f: F) -> Self {
        FnLoss {
            dim,
            f,
            success_below,
            count: AtomicU64::new(0),
        }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> BatchLoss for FnLoss<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn property_names(&self) -> Vec<String> {
        Vec::new()
    }

    fn similarity_names(&self) -> Vec<String> {
        Vec::new()
    }

    fn evaluate_batch(&self, zs: &[&LatentVector]) -> Result<Vec<Assessment>> {
        for z in zs {
            z.check_dim(self.dim)?;
        }
        self.count.fetch_add(zs.len() as u64, Ordering::Relaxed);
        Ok(zs
            .iter()
            .map(|z| {
                let loss = (self.f)(z);
                Assessment {
                    sequence: None,
                    properties: Vec::new(),
                    similarities: Vec::new(),
                    loss,
                    valid: loss <= self.success_below,
                    score: -loss,
                }
            })
            .collect())
    }

    fn evaluations(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }
}

fn expect_mode(cfg: &ObjectiveConfig, mode: LossMode) -> Result<()> {
    if cfg.mode != mode {
        return Err(QmoError::Config(format!(
            "objective is {:?}, expected {mode:?}",
            cfg.mode
        )));
    }
    Ok(())
}

/// Case I loss at `z`: exactly one decode.
pub fn loss_case_i(z: &LatentVector, cfg: &ObjectiveConfig, suite: &OracleSuite) -> Result<f64> {
    expect_mode(cfg, LossMode::CaseI)?;
    Ok(cfg.assess_batch(&[z], suite)?[0].loss)
}

/// Case II loss at `z`: exactly one decode.
pub fn loss_case_ii(z: &LatentVector, cfg: &ObjectiveConfig, suite: &OracleSuite) -> Result<f64> {
    expect_mode(cfg, LossMode::CaseII)?;
    Ok(cfg.assess_batch(&[z], suite)?[0].loss)
}

/// All active constraints hold on `x`; equality counts as satisfied.
pub fn is_valid(x: &Sequence, cfg: &ObjectiveConfig, suite: &OracleSuite) -> Result<bool> {
    Ok(cfg.assess_sequences(&[x], suite)?[0].valid)
}
