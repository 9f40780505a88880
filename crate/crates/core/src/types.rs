//! Domain newtypes shared by every module.

use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{QmoError, Result};

/// A point in the continuous embedding space. Every coordinate is finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct LatentVector(Vec<f64>);

impl LatentVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(QmoError::Domain("latent vector must have d >= 1".into()));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(QmoError::Domain(format!(
                "latent coordinate {i} is not finite ({})",
                coords[i]
            )));
        }
        Ok(LatentVector(coords))
    }

    pub fn zeros(d: usize) -> Self {
        LatentVector(vec![0.0; d.max(1)])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            return Err(QmoError::Dimension {
                expected,
                got: self.dim(),
            });
        }
        Ok(())
    }
}

impl TryFrom<Vec<f64>> for LatentVector {
    type Error = QmoError;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        LatentVector::new(v)
    }
}

impl From<LatentVector> for Vec<f64> {
    fn from(v: LatentVector) -> Vec<f64> {
        v.0
    }
}

impl Deref for LatentVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// A decoded, nonempty discrete sequence (SMILES characters, amino acids, ...).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Sequence(String);

impl Sequence {
    pub fn new(symbols: impl Into<String>) -> Result<Self> {
        let symbols = symbols.into();
        if symbols.is_empty() {
            return Err(QmoError::Domain("sequence must have length >= 1".into()));
        }
        Ok(Sequence(symbols))
    }

    /// Checks that every symbol belongs to `alphabet`.
    pub fn with_alphabet(symbols: impl Into<String>, alphabet: &str) -> Result<Self> {
        let seq = Sequence::new(symbols)?;
        if let Some(c) = seq.0.chars().find(|c| !alphabet.contains(*c)) {
            return Err(QmoError::Domain(format!(
                "symbol {c:?} is not in alphabet {alphabet:?}"
            )));
        }
        Ok(seq)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.chars().count()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl TryFrom<String> for Sequence {
    type Error = QmoError;

    fn try_from(s: String) -> Result<Self> {
        Sequence::new(s)
    }
}

impl From<Sequence> for String {
    fn from(s: Sequence) -> String {
        s.0
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// The reference set `S` similarities are measured against. Never empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Sequence>", into = "Vec<Sequence>")]
pub struct ReferenceSet(Vec<Sequence>);

impl ReferenceSet {
    pub fn new(sequences: Vec<Sequence>) -> Result<Self> {
        if sequences.is_empty() {
            return Err(QmoError::Domain("reference set must be nonempty".into()));
        }
        Ok(ReferenceSet(sequences))
    }

    pub fn single(seq: Sequence) -> Self {
        ReferenceSet(vec![seq])
    }

    pub fn sequences(&self) -> &[Sequence] {
        &self.0
    }

    pub fn cache_key(&self) -> String {
        self.0
            .iter()
            .map(Sequence::as_str)
            .collect::<Vec<_>>()
            .join("\u{1f}")
    }
}

impl TryFrom<Vec<Sequence>> for ReferenceSet {
    type Error = QmoError;

    fn try_from(v: Vec<Sequence>) -> Result<Self> {
        ReferenceSet::new(v)
    }
}

impl From<ReferenceSet> for Vec<Sequence> {
    fn from(r: ReferenceSet) -> Vec<Sequence> {
        r.0
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
