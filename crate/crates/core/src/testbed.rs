//! Synthetic problems whose answers can be checked exhaustively.
//!
//! The codebook decoder splits `z ∈ R^{m·k}` into `m` blocks of `k`
//! coordinates and emits the argmax letter of each block, so the loss seen
//! by the optimizer is piecewise constant in `z`, much like a real
//! discretizing decoder.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{QmoError, Result};
use crate::loss::{FnLoss, ObjectiveConfig};
use crate::metrics::{self, AlignmentParams, Fingerprint, LogBase};
use crate::oracle::{OracleBackend, OracleSuite};
use crate::types::{dot, LatentVector, ReferenceSet, Sequence};

/// Largest search space `brute_force_best` will enumerate.
pub const BRUTE_FORCE_LIMIT: usize = 65_536;

#[derive(Debug, Clone, PartialEq)]
pub struct CodebookDecoder {
    alphabet: Vec<char>,
    length: usize,
}

impl CodebookDecoder {
    pub fn new(alphabet: &str, length: usize) -> Result<Self> {
        let letters: Vec<char> = alphabet.chars().collect();
        if letters.is_empty() || length == 0 {
            return Err(QmoError::Config("codebook needs a nonempty alphabet and length >= 1".into()));
        }
        for (i, c) in letters.iter().enumerate() {
            if letters[..i].contains(c) {
                return Err(QmoError::Config(format!("duplicate alphabet symbol {c:?}")));
            }
        }
        Ok(CodebookDecoder {
            alphabet: letters,
            length,
        })
    }

    pub fn alphabet(&self) -> String {
        self.alphabet.iter().collect()
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn dim(&self) -> usize {
        self.length * self.alphabet.len()
    }

    /// Argmax per block; ties go to the lowest alphabet index.
    pub fn decode(&self, z: &[f64]) -> Result<Sequence> {
        if z.len() != self.dim() {
            return Err(QmoError::Dimension {
                expected: self.dim(),
                got: z.len(),
            });
        }
        let k = self.alphabet.len();
        let s: String = z
            .chunks_exact(k)
            .map(|block| {
                let mut best = 0;
                for (i, &v) in block.iter().enumerate().skip(1) {
                    if v > block[best] {
                        best = i;
                    }
                }
                self.alphabet[best]
            })
            .collect();
        Sequence::new(s)
    }

    /// One-hot embedding; the right inverse of [`decode`](Self::decode).
    pub fn encode(&self, x: &Sequence) -> Result<LatentVector> {
        self.encode_scaled(x, 1.0)
    }

    pub fn encode_scaled(&self, x: &Sequence, scale: f64) -> Result<LatentVector> {
        if x.len() != self.length {
            return Err(QmoError::Domain(format!(
                "sequence {x} has length {}, codebook expects {}",
                x.len(),
                self.length
            )));
        }
        let k = self.alphabet.len();
        let mut z = vec![0.0; self.dim()];
        for (j, c) in x.as_str().chars().enumerate() {
            let i = self.symbol_index(c)?;
            z[j * k + i] = scale;
        }
        LatentVector::new(z)
    }

    fn symbol_index(&self, c: char) -> Result<usize> {
        self.alphabet
            .iter()
            .position(|&a| a == c)
            .ok_or_else(|| QmoError::Domain(format!("symbol {c:?} not in codebook alphabet")))
    }

    /// Sequence number `n` in lexicographic (alphabet-index) order.
    pub fn nth_sequence(&self, mut n: usize) -> Sequence {
        let k = self.alphabet.len();
        let mut out = vec![self.alphabet[0]; self.length];
        for slot in out.iter_mut().rev() {
            *slot = self.alphabet[n % k];
            n /= k;
        }
        Sequence::new(out.into_iter().collect::<String>()).expect("length >= 1")
    }

    pub fn search_space(&self) -> Option<usize> {
        self.alphabet.len().checked_pow(self.length as u32)
    }

    pub fn random_sequence(&self, rng: &mut impl Rng) -> Sequence {
        let s: String = (0..self.length)
            .map(|_| self.alphabet[rng.random_range(0..self.alphabet.len())])
            .collect();
        Sequence::new(s).expect("length >= 1")
    }
}

/// Toy stand-ins for property predictors.
#[derive(Debug, Clone, PartialEq)]
pub enum ToyProperty {
    /// Fraction of positions equal to the symbol, in [0, 1].
    FracOfSymbol(char),
    /// Number of (overlapping) occurrences of the pattern; 0 for an empty pattern.
    WindowCount(String),
    /// Sum of per-symbol weights; unlisted symbols weigh 0.
    WeightedSum(BTreeMap<char, f64>),
}

impl ToyProperty {
    pub fn evaluate(&self, x: &str) -> f64 {
        match self {
            ToyProperty::FracOfSymbol(c) => {
                let n = x.chars().count();
                if n == 0 {
                    return 0.0;
                }
                x.chars().filter(|s| s == c).count() as f64 / n as f64
            }
            ToyProperty::WindowCount(pattern) => {
                if pattern.is_empty() {
                    return 0.0;
                }
                let p: Vec<char> = pattern.chars().collect();
                let s: Vec<char> = x.chars().collect();
                s.windows(p.len()).filter(|w| *w == p.as_slice()).count() as f64
            }
            ToyProperty::WeightedSum(table) => x.chars().map(|c| table.get(&c).copied().unwrap_or(0.0)).sum(),
        }
    }
}

/// Hashes every substring of length `1..=k` into one bit.
pub fn toy_fingerprint(x: &str, width: usize, k: usize) -> Result<Fingerprint> {
    let chars: Vec<char> = x.chars().collect();
    let mut fp = Fingerprint::new(width)?;
    for len in 1..=k.max(1) {
        for w in chars.windows(len) {
            let mut h: u64 = 0xcbf2_9ce4_8422_2325;
            for c in w {
                for b in c.to_string().bytes() {
                    h ^= u64::from(b);
                    h = h.wrapping_mul(0x0100_0000_01b3);
                }
            }
            fp.set((h % width as u64) as usize)?;
        }
    }
    Ok(fp)
}

#[derive(Debug, Clone)]
pub enum ToySimilarity {
    /// Alignment score over log reference length.
    Alignment { params: AlignmentParams, base: LogBase },
    /// The above divided by the reference's self-similarity.
    NormalizedAlignment { params: AlignmentParams, base: LogBase },
    /// Tanimoto over [`toy_fingerprint`]s.
    Tanimoto { width: usize, k: usize },
}

impl ToySimilarity {
    pub fn evaluate(&self, x: &str, reference: &str) -> Result<f64> {
        match self {
            ToySimilarity::Alignment { params, base } => metrics::g_sim(x, reference, params, *base),
            ToySimilarity::NormalizedAlignment { params, base } => {
                metrics::normalized_similarity(x, reference, params, *base)
            }
            ToySimilarity::Tanimoto { width, k } => metrics::tanimoto(
                &toy_fingerprint(x, *width, *k)?,
                &toy_fingerprint(reference, *width, *k)?,
            ),
        }
    }

    /// Best value over the reference set.
    pub fn evaluate_set(&self, x: &str, refs: &ReferenceSet) -> Result<f64> {
        refs.sequences()
            .iter()
            .map(|r| self.evaluate(x, r.as_str()))
            .try_fold(f64::NEG_INFINITY, |acc, v| Ok(acc.max(v?)))
    }
}

/// In-process oracle backend: codebook decoder plus toy scorers.
#[derive(Debug, Clone)]
pub struct TestbedOracle {
    decoder: CodebookDecoder,
    properties: Vec<(String, ToyProperty)>,
    similarities: Vec<(String, ToySimilarity)>,
}

impl TestbedOracle {
    pub fn new(decoder: CodebookDecoder) -> Self {
        TestbedOracle {
            decoder,
            properties: Vec::new(),
            similarities: Vec::new(),
        }
    }

    pub fn decoder(&self) -> &CodebookDecoder {
        &self.decoder
    }

    pub fn with_property(mut self, name: impl Into<String>, p: ToyProperty) -> Self {
        self.properties.push((name.into(), p));
        self
    }

    pub fn with_similarity(mut self, name: impl Into<String>, s: ToySimilarity) -> Self {
        self.similarities.push((name.into(), s));
        self
    }

    pub fn with_alignment(self, name: impl Into<String>) -> Self {
        self.with_similarity(
            name,
            ToySimilarity::Alignment {
                params: AlignmentParams::blosum62(),
                base: LogBase::Natural,
            },
        )
    }

    pub fn with_tanimoto(self, name: impl Into<String>, width: usize, k: usize) -> Self {
        self.with_similarity(name, ToySimilarity::Tanimoto { width, k })
    }

    fn property(&self, name: &str) -> Result<&ToyProperty> {
        self.properties
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, p)| p)
            .ok_or_else(|| QmoError::Config(format!("unknown property {name:?}")))
    }

    fn similarity(&self, name: &str) -> Result<&ToySimilarity> {
        self.similarities
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, s)| s)
            .ok_or_else(|| QmoError::Config(format!("unknown similarity {name:?}")))
    }
}

impl OracleBackend for TestbedOracle {
    fn dim(&self) -> usize {
        self.decoder.dim()
    }

    fn property_names(&self) -> Vec<String> {
        self.properties.iter().map(|(n, _)| n.clone()).collect()
    }

    fn similarity_names(&self) -> Vec<String> {
        self.similarities.iter().map(|(n, _)| n.clone()).collect()
    }

    fn decode_batch(&self, zs: &[&LatentVector]) -> Result<Vec<Sequence>> {
        zs.iter().map(|z| self.decoder.decode(z)).collect()
    }

    fn property_batch(&self, name: &str, xs: &[&Sequence]) -> Result<Vec<f64>> {
        let p = self.property(name)?;
        Ok(xs.iter().map(|x| p.evaluate(x.as_str())).collect())
    }

    fn similarity_batch(&self, name: &str, xs: &[&Sequence], refs: &ReferenceSet) -> Result<Vec<f64>> {
        let s = self.similarity(name)?;
        xs.iter().map(|x| s.evaluate_set(x.as_str(), refs)).collect()
    }
}

/// Smooth losses with closed-form gradients.
#[derive(Debug, Clone, PartialEq)]
pub enum SmoothProblem {
    /// `a · z`
    Linear { a: Vec<f64> },
    /// `‖z − center‖²`
    Quadratic { center: Vec<f64> },
}

impl SmoothProblem {
    pub fn dim(&self) -> usize {
        match self {
            SmoothProblem::Linear { a } => a.len(),
            SmoothProblem::Quadratic { center } => center.len(),
        }
    }

    pub fn loss(&self, z: &[f64]) -> f64 {
        match self {
            SmoothProblem::Linear { a } => dot(a, z),
            SmoothProblem::Quadratic { center } => {
                z.iter().zip(center).map(|(x, c)| (x - c) * (x - c)).sum()
            }
        }
    }

    pub fn gradient(&self, z: &[f64]) -> Vec<f64> {
        match self {
            SmoothProblem::Linear { a } => a.clone(),
            SmoothProblem::Quadratic { center } => {
                z.iter().zip(center).map(|(x, c)| 2.0 * (x - c)).collect()
            }
        }
    }

    pub fn loss_and_grad(&self, z: &[f64]) -> (f64, Vec<f64>) {
        (self.loss(z), self.gradient(z))
    }

    /// A [`BatchLoss`](crate::loss::BatchLoss) view; iterates with loss
    /// `<= success_below` count as valid.
    pub fn as_loss(&self, success_below: f64) -> FnLoss<impl Fn(&[f64]) -> f64 + Sync + '_> {
        FnLoss::new(self.dim(), success_below, move |z| self.loss(z))
    }
}

/// The exhaustive optimum of an objective over the codebook's sequence space.
#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceBest {
    pub sequence: Sequence,
    pub score: f64,
    pub properties: Vec<f64>,
    pub similarities: Vec<f64>,
    pub feasible_count: usize,
}

/// Enumerates every sequence, keeps the valid ones and returns the highest
/// molecular score (first in lexicographic order on ties). `None` when no
/// sequence is valid.
pub fn brute_force_best(
    objective: &ObjectiveConfig,
    decoder: &CodebookDecoder,
    suite: &OracleSuite,
) -> Result<Option<BruteForceBest>> {
    let space = decoder
        .search_space()
        .filter(|&n| n <= BRUTE_FORCE_LIMIT)
        .ok_or_else(|| {
            QmoError::Domain(format!(
                "search space {}^{} exceeds {BRUTE_FORCE_LIMIT}",
                decoder.alphabet.len(),
                decoder.length
            ))
        })?;
    let all: Vec<Sequence> = (0..space).map(|n| decoder.nth_sequence(n)).collect();
    let refs: Vec<&Sequence> = all.iter().collect();
    let assessed = objective.assess_sequences(&refs, suite)?;
    let feasible_count = assessed.iter().filter(|a| a.valid).count();
    let mut best: Option<(usize, f64)> = None;
    for (i, a) in assessed.iter().enumerate() {
        if a.valid && best.is_none_or(|(_, s)| a.score > s) {
            best = Some((i, a.score));
        }
    }
    Ok(best.map(|(i, score)| BruteForceBest {
        sequence: all[i].clone(),
        score,
        properties: assessed[i].properties.clone(),
        similarities: assessed[i].similarities.clone(),
        feasible_count,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::{Constraint, LossMode, ScoreTerm};

    fn seq(s: &str) -> Sequence {
        Sequence::new(s).unwrap()
    }

    #[test]
    fn decode_examples() {
        let d = CodebookDecoder::new("ACGT", 4).unwrap();
        assert_eq!(d.dim(), 16);
        let z = d.encode(&seq("ACAC")).unwrap();
        assert_eq!(d.decode(&z).unwrap().as_str(), "ACAC");
        assert_eq!(d.decode(&[0.0; 16]).unwrap().as_str(), "AAAA");
        let mut tied = z.clone().into_inner();
        tied[2] = 1.0; // block 0: A and G both 1
        assert_eq!(d.decode(&tied).unwrap().as_str(), "ACAC");
        let mut nudged = z.into_inner();
        nudged[1] = 0.9;
        nudged[4] = -3.0;
        assert_eq!(d.decode(&nudged).unwrap().as_str(), "ACAC");
        assert!(d.decode(&[0.0; 15]).is_err());
    }

    #[test]
    fn codebook_is_surjective_small() {
        let d = CodebookDecoder::new("AB", 3).unwrap();
        let mut seen: Vec<String> = (0..8)
            .map(|n| {
                let s = d.nth_sequence(n);
                d.decode(&d.encode(&s).unwrap()).unwrap().as_str().to_owned()
            })
            .collect();
        seen.dedup();
        assert_eq!(seen.len(), 8);
        assert_eq!(d.nth_sequence(0).as_str(), "AAA");
        assert_eq!(d.nth_sequence(5).as_str(), "BAB");
    }

    #[test]
    fn toy_properties() {
        assert_eq!(ToyProperty::FracOfSymbol('A').evaluate("AABA"), 0.75);
        assert_eq!(ToyProperty::WindowCount("AB".into()).evaluate("ABAB"), 2.0);
        assert_eq!(ToyProperty::WindowCount("AA".into()).evaluate("AAA"), 2.0);
        assert_eq!(ToyProperty::WindowCount(String::new()).evaluate("ABAB"), 0.0);
        assert_eq!(ToyProperty::WeightedSum(BTreeMap::new()).evaluate("ABAB"), 0.0);
        let table = BTreeMap::from([('A', 1.5), ('B', -1.0)]);
        assert_eq!(ToyProperty::WeightedSum(table).evaluate("ABAC"), 2.0);
    }

    #[test]
    fn smooth_problem_gradients() {
        let center = vec![1.0, -2.0, 0.5];
        let q = SmoothProblem::Quadratic { center: center.clone() };
        assert_eq!(q.loss_and_grad(&center), (0.0, vec![0.0; 3]));
        let mut p = center.clone();
        p[0] += 1.0;
        assert_eq!(q.loss_and_grad(&p), (1.0, vec![2.0, 0.0, 0.0]));
        let l = SmoothProblem::Linear { a: vec![3.0, -1.0] };
        assert_eq!(l.gradient(&[10.0, 7.0]), vec![3.0, -1.0]);
    }

    #[test]
    fn smooth_gradients_match_central_differences() {
        let probs = [
            SmoothProblem::Quadratic { center: vec![0.3, -1.2, 2.0, 0.0] },
            SmoothProblem::Linear { a: vec![1.0, -2.0, 0.5, 4.0] },
        ];
        let z = [0.7, 0.1, -0.4, 1.3];
        let h = 1e-5;
        for p in &probs {
            let g = p.gradient(&z);
            for i in 0..z.len() {
                let (mut up, mut dn) = (z, z);
                up[i] += h;
                dn[i] -= h;
                let fd = (p.loss(&up) - p.loss(&dn)) / (2.0 * h);
                assert!((fd - g[i]).abs() <= 1e-6 * g[i].abs().max(1.0), "{fd} vs {}", g[i]);
            }
        }
    }

    fn frac_alignment_suite() -> (CodebookDecoder, OracleSuite) {
        let d = CodebookDecoder::new("ACGT", 4).unwrap();
        let oracle = TestbedOracle::new(d.clone())
            .with_property("frac_A", ToyProperty::FracOfSymbol('A'))
            .with_alignment("align");
        (d, OracleSuite::new(Box::new(oracle)))
    }

    #[test]
    fn brute_force_returns_start_when_feasible() {
        let (d, suite) = frac_alignment_suite();
        let x0 = seq("AACG");
        let obj = ObjectiveConfig::new(
            LossMode::CaseI,
            vec![Constraint::at_least("frac_A", 0.5)],
            vec![ScoreTerm::new("align", 1.0)],
            ReferenceSet::single(x0.clone()),
        )
        .unwrap();
        let best = brute_force_best(&obj, &d, &suite).unwrap().unwrap();
        assert_eq!(best.sequence, x0);
        let self_sim = metrics::g_sim("AACG", "AACG", &AlignmentParams::blosum62(), LogBase::Natural).unwrap();
        assert_eq!(best.score, self_sim);
    }

    #[test]
    fn brute_force_infeasible_and_too_large() {
        let (d, suite) = frac_alignment_suite();
        let obj = ObjectiveConfig::new(
            LossMode::CaseI,
            vec![Constraint::at_least("frac_A", 1.5)],
            vec![ScoreTerm::new("align", 1.0)],
            ReferenceSet::single(seq("CCCC")),
        )
        .unwrap();
        assert!(brute_force_best(&obj, &d, &suite).unwrap().is_none());
        let big = CodebookDecoder::new("ACGT", 9).unwrap();
        assert!(brute_force_best(&obj, &big, &suite).is_err());
    }

    #[test]
    fn similarity_uses_best_reference() {
        let s = ToySimilarity::Tanimoto { width: 256, k: 2 };
        let refs = ReferenceSet::new(vec![seq("CCCC"), seq("ACGT")]).unwrap();
        assert_eq!(s.evaluate_set("ACGT", &refs).unwrap(), 1.0);
        assert_eq!(s.evaluate("AAAA", "CCCC").unwrap(), 0.0);
    }
}
