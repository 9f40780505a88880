//! Run configuration: one TOML file with flat sections. Unknown keys are
//! errors so misspelled hyperparameters never pass silently.
//!
//! ```toml
//! seed = 7                       # default 0
//! out_dir = "runs/demo"          # default "qmo-out"
//!
//! [objective]
//! mode = "case_i"                # or "case_ii"
//! start = "ACGTAC"               # x0; or start_latent = [..] / start_latent_file
//! refs = ["ACGTAC"]              # default: [start]
//! constraints = [{ name = "frac_A", threshold = 0.5, direction = "at_least" }]
//! scores = [{ name = "align", coefficient = 0.01 }]
//!
//! [solver]                       # defaults shown
//! optimizer = "adam"             # or "gd"
//! alpha0 = 0.05
//! T = 20
//! Q = 50
//! beta = 1.0                     # codebook; 1e-2 smooth, 10.0 subprocess
//! restarts = 1
//! stop_on_first_success = false
//! schedule = "constant"          # gd only; or "inv_sqrt"
//! adam = { beta1 = 0.9, beta2 = 0.999, eps = 1e-8 }
//!
//! [oracle]
//! testbed = "codebook"           # "codebook" | "quadratic" | "linear"; or command = "..."
//! alphabet = "ACGT"
//! length = 6
//! cache = false
//! properties = [{ name = "frac_A", kind = "frac_of_symbol", symbol = "A" }]
//! similarities = [{ name = "align", kind = "alignment" }]
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{QmoError, Result};
use crate::landscape::{Axis, GridMode, LandscapeGrid};
use crate::loss::{Constraint, LossMode, ObjectiveConfig, ScoreTerm};
use crate::metrics::{AlignmentParams, LogBase, SubstitutionMatrix};
use crate::oracle::{OracleBackend, OracleSuite, SubprocessOracle, SubprocessSpec};
use crate::rng::{stream, Role};
use crate::solver::{AdamParams, OptimizerKind, SolverConfig, StepSchedule, SweepGrid};
use crate::testbed::{CodebookDecoder, SmoothProblem, TestbedOracle, ToyProperty, ToySimilarity};
use crate::types::{LatentVector, ReferenceSet, Sequence};

pub const CODEBOOK_BETA: f64 = 1.0;
pub const SMOOTH_BETA: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub objective: Option<ObjectiveSection>,
    #[serde(default)]
    pub solver: SolverSection,
    pub oracle: OracleSection,
    #[serde(default)]
    pub sweep: Option<SweepGrid>,
    #[serde(default)]
    pub landscape: LandscapeSection,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("qmo-out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveSection {
    pub mode: LossMode,
    #[serde(default)]
    pub start: Option<String>,
    #[serde(default)]
    pub start_latent: Option<Vec<f64>>,
    /// Little-endian f64 file holding `z0`.
    #[serde(default)]
    pub start_latent_file: Option<PathBuf>,
    /// Extra starts for stability studies.
    #[serde(default)]
    pub starts: Vec<String>,
    /// Codebook only: this many random starts that violate the constraints.
    #[serde(default)]
    pub random_starts: usize,
    #[serde(default)]
    pub refs: Vec<String>,
    pub constraints: Vec<Constraint>,
    pub scores: Vec<ScoreTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default)]
    pub optimizer: OptimizerKind,
    #[serde(default = "d_alpha0")]
    pub alpha0: f64,
    #[serde(rename = "T", default = "d_iterations")]
    pub iterations: usize,
    #[serde(rename = "Q", default = "d_queries")]
    pub queries: usize,
    /// Default depends on the oracle: 1.0 for the codebook, 1e-2 for smooth
    /// testbeds, 10.0 for subprocess oracles.
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default = "d_restarts")]
    pub restarts: usize,
    #[serde(default)]
    pub stop_on_first_success: bool,
    #[serde(default)]
    pub schedule: StepSchedule,
    #[serde(default)]
    pub adam: AdamParams,
}

fn d_alpha0() -> f64 {
    SolverConfig::default().alpha0
}
fn d_iterations() -> usize {
    SolverConfig::default().iterations
}
fn d_queries() -> usize {
    SolverConfig::default().queries
}
fn d_restarts() -> usize {
    1
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            optimizer: OptimizerKind::default(),
            alpha0: d_alpha0(),
            iterations: d_iterations(),
            queries: d_queries(),
            beta: None,
            restarts: d_restarts(),
            stop_on_first_success: false,
            schedule: StepSchedule::default(),
            adam: AdamParams::default(),
        }
    }
}

impl SolverSection {
    pub fn to_config(&self, seed: u64, default_beta: f64) -> SolverConfig {
        SolverConfig {
            optimizer: self.optimizer,
            alpha0: self.alpha0,
            iterations: self.iterations,
            queries: self.queries,
            beta: self.beta.unwrap_or(default_beta),
            restarts: self.restarts,
            stop_on_first_success: self.stop_on_first_success,
            seed,
            schedule: self.schedule,
            adam: self.adam,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestbedKind {
    Codebook,
    Quadratic,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    #[serde(default)]
    pub testbed: Option<TestbedKind>,
    /// Subprocess oracle command line, run through `sh -c`.
    #[serde(default)]
    pub command: Option<String>,
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub alphabet: Option<String>,
    #[serde(default)]
    pub length: Option<usize>,
    #[serde(default)]
    pub cache: bool,
    #[serde(default)]
    pub properties: Vec<OracleEntry>,
    #[serde(default)]
    pub similarities: Vec<OracleEntry>,
    /// Smooth testbeds: iterates with loss at or below this count as valid.
    #[serde(default = "d_success_below")]
    pub success_below: f64,
    /// Smooth testbeds: explicit `a` (linear) or center (quadratic).
    #[serde(default)]
    pub center: Option<Vec<f64>>,
}

fn d_success_below() -> f64 {
    1e-2
}

/// One named property or similarity oracle. Only `name` is needed for
/// subprocess oracles; testbed entries also pick a `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleEntry {
    pub name: String,
    #[serde(default)]
    pub kind: Option<String>,
    #[serde(default)]
    pub symbol: Option<char>,
    #[serde(default)]
    pub pattern: Option<String>,
    #[serde(default)]
    pub weights: Option<BTreeMap<char, f64>>,
    #[serde(default)]
    pub width: Option<usize>,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub gap_open: Option<f64>,
    #[serde(default)]
    pub gap_extend: Option<f64>,
    #[serde(default)]
    pub log_base: Option<LogBase>,
    /// Substitution matrix file; BLOSUM62 when absent.
    #[serde(default)]
    pub matrix: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LandscapeSection {
    #[serde(default = "d_mode")]
    pub mode: GridMode,
    #[serde(default)]
    pub x_range: Option<[f64; 2]>,
    #[serde(default)]
    pub y_range: Option<[f64; 2]>,
    #[serde(default)]
    pub resolution: Option<[usize; 2]>,
    /// Number of grids (random directions) to emit.
    #[serde(default = "d_grids")]
    pub grids: usize,
}

fn d_mode() -> GridMode {
    GridMode::Principal
}
fn d_grids() -> usize {
    1
}

impl Default for LandscapeSection {
    fn default() -> Self {
        LandscapeSection {
            mode: d_mode(),
            x_range: None,
            y_range: None,
            resolution: None,
            grids: d_grids(),
        }
    }
}

impl LandscapeSection {
    pub fn axes(&self) -> Result<(Axis, Axis)> {
        self.axes_for(self.mode)
    }

    /// Axes for `mode`; unset ranges take that mode's defaults.
    pub fn axes_for(&self, mode: GridMode) -> Result<(Axis, Axis)> {
        let (dx, dy) = LandscapeGrid::default_axes(mode);
        let [nx, ny] = self.resolution.unwrap_or([dx.points, dy.points]);
        let [xl, xh] = self.x_range.unwrap_or([dx.lo, dx.hi]);
        let [yl, yh] = self.y_range.unwrap_or([dy.lo, dy.hi]);
        Ok((Axis::new(xl, xh, nx)?, Axis::new(yl, yh, ny)?))
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| QmoError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| QmoError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            QmoError::Config(m) => QmoError::Config(format!("{}: {m}", path.display())),
            e => e,
        })?;
        // Relative paths inside the file resolve against its directory.
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(obj) = cfg.objective.as_mut() {
            if let Some(p) = obj.start_latent_file.as_mut() {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        for e in cfg.oracle.properties.iter_mut().chain(cfg.oracle.similarities.iter_mut()) {
            if let Some(p) = e.matrix.as_mut() {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    /// SHA-256 over the canonical JSON form of the effective configuration.
    /// The output directory is left out so moving a run does not change it.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.out_dir = PathBuf::new();
        let json = serde_json::to_string(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn solver_config(&self) -> SolverConfig {
        let beta = match self.oracle.testbed {
            Some(TestbedKind::Codebook) => CODEBOOK_BETA,
            Some(_) => SMOOTH_BETA,
            None => SolverConfig::default().beta,
        };
        self.solver.to_config(self.seed, beta)
    }

    /// Swaps in a subprocess oracle, keeping declared names and dimension.
    /// A codebook problem keeps its dimension and its start, encoded to `z0`.
    pub fn override_oracle_command(&mut self, command: String) -> Result<()> {
        if self.oracle.testbed == Some(TestbedKind::Codebook) {
            let decoder = self.testbed_oracle()?.decoder().clone();
            self.oracle.dim.get_or_insert(decoder.dim());
            if let Some(obj) = self.objective.as_mut() {
                if let (None, None, Some(start)) = (&obj.start_latent, &obj.start_latent_file, &obj.start) {
                    let seq = Sequence::with_alphabet(start.clone(), &decoder.alphabet())?;
                    obj.start_latent = Some(decoder.encode(&seq)?.into_inner());
                }
            }
        }
        self.oracle.testbed = None;
        self.oracle.command = Some(command);
        Ok(())
    }

    /// Validates everything and builds the runnable problem.
    pub fn prepare(&self) -> Result<Prepared> {
        self.solver_config().validate()?;
        let o = &self.oracle;
        match (o.testbed, &o.command) {
            (Some(_), Some(_)) => {
                return Err(QmoError::Config("[oracle] needs exactly one of testbed or command".into()))
            }
            (None, None) => {
                return Err(QmoError::Config("[oracle] needs one of testbed or command".into()))
            }
            _ => {}
        }
        match o.testbed {
            Some(TestbedKind::Quadratic | TestbedKind::Linear) => self.prepare_smooth(),
            Some(TestbedKind::Codebook) => self.prepare_codebook(),
            None => self.prepare_subprocess(),
        }
    }

    fn objective_section(&self) -> Result<&ObjectiveSection> {
        self.objective
            .as_ref()
            .ok_or_else(|| QmoError::Config("missing [objective] section".into()))
    }

    fn prepare_smooth(&self) -> Result<Prepared> {
        let o = &self.oracle;
        let kind = o.testbed.expect("smooth testbed");
        let center = match (&o.center, o.dim) {
            (Some(c), _) => c.clone(),
            (None, Some(d)) if d > 0 => {
                let mut rng = stream(self.seed, Role::Problem, 0);
                (0..d).map(|_| StandardNormal.sample(&mut rng)).collect()
            }
            _ => return Err(QmoError::Config("smooth testbed needs oracle.dim or oracle.center".into())),
        };
        if center.is_empty() || center.iter().any(|c| !c.is_finite()) {
            return Err(QmoError::Config("oracle.center must be nonempty and finite".into()));
        }
        let d = center.len();
        let problem = match kind {
            TestbedKind::Quadratic => SmoothProblem::Quadratic { center },
            _ => SmoothProblem::Linear { a: center },
        };
        let z0 = match self.objective.as_ref().and_then(|s| s.start_latent.clone()) {
            Some(z) => {
                let z = LatentVector::new(z)?;
                z.check_dim(d)?;
                z
            }
            None => LatentVector::zeros(d),
        };
        Ok(Prepared::Smooth {
            problem,
            success_below: o.success_below,
            z0,
        })
    }

    /// The codebook oracle described by `[oracle]`.
    pub fn testbed_oracle(&self) -> Result<TestbedOracle> {
        let o = &self.oracle;
        if o.testbed != Some(TestbedKind::Codebook) {
            return Err(QmoError::Config("oracle.testbed must be \"codebook\"".into()));
        }
        let alphabet = o.alphabet.as_deref().ok_or_else(|| QmoError::Config("codebook needs oracle.alphabet".into()))?;
        let length = o.length.ok_or_else(|| QmoError::Config("codebook needs oracle.length".into()))?;
        let mut backend = TestbedOracle::new(CodebookDecoder::new(alphabet, length)?);
        for p in &o.properties {
            backend = backend.with_property(p.name.clone(), toy_property(p)?);
        }
        for s in &o.similarities {
            backend = backend.with_similarity(s.name.clone(), toy_similarity(s)?);
        }
        Ok(backend)
    }

    fn prepare_codebook(&self) -> Result<Prepared> {
        let o = &self.oracle;
        let backend = self.testbed_oracle()?;
        let decoder = backend.decoder().clone();
        let alphabet = decoder.alphabet();
        let alphabet = alphabet.as_str();
        let suite = OracleSuite::new(Box::new(backend)).with_cache(o.cache);
        let obj = self.objective_section()?;

        let mut starts = Vec::new();
        let mut labels: Vec<String> = obj.start.iter().chain(&obj.starts).cloned().collect();
        labels.dedup();
        for s in labels {
            let seq = Sequence::with_alphabet(s, alphabet)?;
            starts.push(Start {
                latent: decoder.encode(&seq)?,
                sequence: Some(seq),
            });
        }
        // With only random starts the reference is replaced per start.
        let first = match starts.first() {
            Some(s) => s.sequence.clone(),
            None => Some(decoder.nth_sequence(0)),
        };
        let base = self.base_objective(obj, first)?;
        base.check_names(&suite)?;
        if obj.random_starts > 0 {
            let mut rng = stream(self.seed, Role::Starts, 0);
            let mut found = 0;
            for _ in 0..obj.random_starts * 1000 {
                if found == obj.random_starts {
                    break;
                }
                let seq = decoder.random_sequence(&mut rng);
                let objective = base.with_refs_for(&seq, obj.refs.is_empty());
                if !crate::loss::is_valid(&seq, &objective, &suite)? {
                    starts.push(Start {
                        latent: decoder.encode(&seq)?,
                        sequence: Some(seq),
                    });
                    found += 1;
                }
            }
            if found < obj.random_starts {
                return Err(QmoError::Config(format!(
                    "could only draw {found} of {} constraint-violating random starts",
                    obj.random_starts
                )));
            }
        }
        if starts.is_empty() {
            return Err(QmoError::Config("objective needs start, starts or random_starts".into()));
        }
        suite.reset_query_counts();
        Ok(Prepared::Qmo(QmoSetup {
            objective: base,
            refs_follow_start: obj.refs.is_empty(),
            suite,
            decoder: Some(decoder),
            starts,
        }))
    }

    fn prepare_subprocess(&self) -> Result<Prepared> {
        let o = &self.oracle;
        let dim = o.dim.ok_or_else(|| QmoError::Config("subprocess oracle needs oracle.dim".into()))?;
        let obj = self.objective_section()?;
        let latent = match (&obj.start_latent, &obj.start_latent_file) {
            (Some(z), None) => LatentVector::new(z.clone())?,
            (None, Some(path)) => read_latent_file(path, dim)?,
            _ => {
                return Err(QmoError::Config(
                    "subprocess oracle needs exactly one of start_latent or start_latent_file".into(),
                ))
            }
        };
        latent.check_dim(dim)?;
        let start_seq = obj.start.as_deref().map(Sequence::new).transpose()?;
        if obj.refs.is_empty() && start_seq.is_none() {
            return Err(QmoError::Config("subprocess oracle needs refs or a start sequence".into()));
        }
        let base = self.base_objective(obj, start_seq.clone())?;
        let spec = SubprocessSpec {
            command: o.command.clone().expect("command set"),
            dim,
            properties: o.properties.iter().map(|p| p.name.clone()).collect(),
            similarities: o.similarities.iter().map(|s| s.name.clone()).collect(),
        };
        let backend: Box<dyn OracleBackend> = Box::new(SubprocessOracle::spawn(spec)?);
        let suite = OracleSuite::new(backend).with_cache(o.cache);
        base.check_names(&suite)?;
        Ok(Prepared::Qmo(QmoSetup {
            objective: base,
            refs_follow_start: false,
            suite,
            decoder: None,
            starts: vec![Start {
                sequence: start_seq,
                latent,
            }],
        }))
    }

    fn base_objective(&self, obj: &ObjectiveSection, start: Option<Sequence>) -> Result<ObjectiveConfig> {
        let refs = if obj.refs.is_empty() {
            let s = start.ok_or_else(|| QmoError::Config("objective needs refs or a start sequence".into()))?;
            ReferenceSet::single(s)
        } else {
            ReferenceSet::new(obj.refs.iter().map(Sequence::new).collect::<Result<_>>()?)?
        };
        ObjectiveConfig::new(obj.mode, obj.constraints.clone(), obj.scores.clone(), refs)
    }
}

impl ObjectiveConfig {
    /// Same objective measured against `start` when `follow` is set.
    pub fn with_refs_for(&self, start: &Sequence, follow: bool) -> ObjectiveConfig {
        let mut o = self.clone();
        if follow {
            o.refs = ReferenceSet::single(start.clone());
        }
        o
    }
}

fn toy_property(e: &OracleEntry) -> Result<ToyProperty> {
    let need = |what: &str| QmoError::Config(format!("property {:?} needs {what}", e.name));
    match e.kind.as_deref() {
        Some("frac_of_symbol") => Ok(ToyProperty::FracOfSymbol(e.symbol.ok_or_else(|| need("symbol"))?)),
        Some("window_count") => Ok(ToyProperty::WindowCount(e.pattern.clone().ok_or_else(|| need("pattern"))?)),
        Some("weighted_sum") => Ok(ToyProperty::WeightedSum(e.weights.clone().ok_or_else(|| need("weights"))?)),
        other => Err(QmoError::Config(format!(
            "property {:?}: unknown kind {other:?} (frac_of_symbol | window_count | weighted_sum)",
            e.name
        ))),
    }
}

fn toy_similarity(e: &OracleEntry) -> Result<ToySimilarity> {
    let params = || -> Result<AlignmentParams> {
        let base = AlignmentParams::blosum62();
        let matrix = match &e.matrix {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|err| QmoError::Config(format!("cannot read {}: {err}", path.display())))?;
                Arc::new(SubstitutionMatrix::parse(&text)?)
            }
            None => base.matrix.clone(),
        };
        AlignmentParams::new(matrix, e.gap_open.unwrap_or(base.gap_open), e.gap_extend.unwrap_or(base.gap_extend))
    };
    let base = e.log_base.unwrap_or_default();
    match e.kind.as_deref() {
        Some("alignment") => Ok(ToySimilarity::Alignment { params: params()?, base }),
        Some("normalized_alignment") => Ok(ToySimilarity::NormalizedAlignment { params: params()?, base }),
        Some("tanimoto") => Ok(ToySimilarity::Tanimoto {
            width: e.width.unwrap_or(crate::metrics::DEFAULT_FINGERPRINT_WIDTH),
            k: e.k.unwrap_or(2),
        }),
        other => Err(QmoError::Config(format!(
            "similarity {:?}: unknown kind {other:?} (alignment | normalized_alignment | tanimoto)",
            e.name
        ))),
    }
}

/// Reads `dim` little-endian f64 values.
pub fn read_latent_file(path: &Path, dim: usize) -> Result<LatentVector> {
    let bytes = std::fs::read(path).map_err(|e| QmoError::Config(format!("cannot read {}: {e}", path.display())))?;
    if bytes.len() != dim * 8 {
        return Err(QmoError::Config(format!(
            "{} holds {} bytes, expected {} for d = {dim}",
            path.display(),
            bytes.len(),
            dim * 8
        )));
    }
    LatentVector::new(
        bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect(),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct Start {
    pub sequence: Option<Sequence>,
    pub latent: LatentVector,
}

pub struct QmoSetup {
    /// Objective for the first start.
    pub objective: ObjectiveConfig,
    /// Whether each start is its own reference set.
    pub refs_follow_start: bool,
    pub suite: OracleSuite,
    pub decoder: Option<CodebookDecoder>,
    pub starts: Vec<Start>,
}

impl QmoSetup {
    pub fn objective_for(&self, start: &Start) -> ObjectiveConfig {
        match &start.sequence {
            Some(seq) => self.objective.with_refs_for(seq, self.refs_follow_start),
            None => self.objective.clone(),
        }
    }
}

pub enum Prepared {
    Qmo(QmoSetup),
    Smooth {
        problem: SmoothProblem,
        success_below: f64,
        z0: LatentVector,
    },
}

#[cfg(test)]
mod tests {
    use super::*;

    const CODEBOOK: &str = r#"
seed = 3
[objective]
mode = "case_i"
start = "CGTCGT"
constraints = [{ name = "frac_A", threshold = 0.5 }]
scores = [{ name = "align", coefficient = 0.01 }]
[solver]
T = 5
Q = 4
beta = 1.0
[oracle]
testbed = "codebook"
alphabet = "ACGT"
length = 6
properties = [{ name = "frac_A", kind = "frac_of_symbol", symbol = "A" }]
similarities = [{ name = "align", kind = "alignment" }]
"#;

    #[test]
    fn parses_codebook_config() {
        let cfg = RunConfig::parse(CODEBOOK).unwrap();
        assert_eq!(cfg.solver.iterations, 5);
        assert_eq!(cfg.solver.adam, AdamParams::default());
        let Prepared::Qmo(setup) = cfg.prepare().unwrap() else { panic!() };
        assert_eq!(setup.starts.len(), 1);
        assert_eq!(setup.objective.refs.sequences()[0].as_str(), "CGTCGT");
        assert_eq!(setup.suite.dim(), 24);
    }

    #[test]
    fn unknown_key_reports_field_and_line() {
        let bad = CODEBOOK.replace("beta = 1.0", "bta = 1.0");
        let err = RunConfig::parse(&bad).unwrap_err().to_string();
        assert!(err.contains("bta"), "{err}");
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn rejects_two_oracle_sources_and_unknown_names() {
        let both = CODEBOOK.replace("testbed = \"codebook\"", "testbed = \"codebook\"\ncommand = \"cat\"");
        assert!(RunConfig::parse(&both).unwrap().prepare().is_err());
        let missing = CODEBOOK.replace("name = \"align\", coefficient", "name = \"nope\", coefficient");
        assert!(RunConfig::parse(&missing).unwrap().prepare().is_err());
    }

    #[test]
    fn random_starts_violate_constraints() {
        let cfg = RunConfig::parse(&CODEBOOK.replace("start = \"CGTCGT\"", "random_starts = 10")).unwrap();
        let Prepared::Qmo(setup) = cfg.prepare().unwrap() else { panic!() };
        assert_eq!(setup.starts.len(), 10);
        for s in &setup.starts {
            let seq = s.sequence.as_ref().unwrap();
            let obj = setup.objective_for(s);
            assert_eq!(obj.refs.sequences()[0], *seq);
            assert!(!crate::loss::is_valid(seq, &obj, &setup.suite).unwrap());
        }
        assert_eq!(setup.suite.snapshot_query_counts().properties["frac_A"], 10);
    }

    #[test]
    fn smooth_problem_is_seeded() {
        let text = "seed = 4\n[oracle]\ntestbed = \"quadratic\"\ndim = 8\n";
        let a = RunConfig::parse(text).unwrap().prepare().unwrap();
        let b = RunConfig::parse(text).unwrap().prepare().unwrap();
        match (a, b) {
            (Prepared::Smooth { problem: p, z0, .. }, Prepared::Smooth { problem: q, .. }) => {
                assert_eq!(p, q);
                assert_eq!(z0, LatentVector::zeros(8));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::parse(CODEBOOK).unwrap();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.out_dir = PathBuf::from("elsewhere");
        assert_eq!(a.hash(), b.hash());
        b.seed = 4;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn latent_file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("z0.bin");
        let bytes: Vec<u8> = [1.5f64, -2.0].iter().flat_map(|v| v.to_le_bytes()).collect();
        std::fs::write(&p, bytes).unwrap();
        assert_eq!(read_latent_file(&p, 2).unwrap().as_slice(), &[1.5, -2.0]);
        assert!(read_latent_file(&p, 3).is_err());
    }
}
