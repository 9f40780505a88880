//! Query-counted access to the black boxes: one decoder, named property
//! predictors `f_i` and named similarity metrics `g_j`.
//!
//! Backends implement [`OracleBackend`] with batch calls; [`OracleSuite`]
//! wraps a backend with atomic per-oracle counters and an optional cache.
//! Counters count backend queries, so with caching off every evaluation
//! increments exactly one counter.

mod subprocess;

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{QmoError, Result};
use crate::types::{LatentVector, ReferenceSet, Sequence};

pub use subprocess::{serve, OracleReply, OracleRequest, SubprocessOracle, SubprocessSpec};

/// A decoder plus property and similarity oracles, all answering in batches.
/// Replies must be in input order. Implementations must be deterministic.
pub trait OracleBackend: Send + Sync {
    fn dim(&self) -> usize;
    fn property_names(&self) -> Vec<String>;
    fn similarity_names(&self) -> Vec<String>;
    fn decode_batch(&self, zs: &[&LatentVector]) -> Result<Vec<Sequence>>;
    fn property_batch(&self, name: &str, xs: &[&Sequence]) -> Result<Vec<f64>>;
    fn similarity_batch(&self, name: &str, xs: &[&Sequence], refs: &ReferenceSet)
        -> Result<Vec<f64>>;
}

/// Snapshot of query counters.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryCounts {
    pub decoder: u64,
    pub loss_evaluations: u64,
    pub properties: BTreeMap<String, u64>,
    pub similarities: BTreeMap<String, u64>,
}

impl QueryCounts {
    pub fn merge(&mut self, other: &QueryCounts) {
        self.decoder += other.decoder;
        self.loss_evaluations += other.loss_evaluations;
        for (k, v) in &other.properties {
            *self.properties.entry(k.clone()).or_default() += v;
        }
        for (k, v) in &other.similarities {
            *self.similarities.entry(k.clone()).or_default() += v;
        }
    }
}

#[derive(Default)]
struct Cache {
    decode: HashMap<Vec<u64>, Sequence>,
    property: HashMap<(usize, String), f64>,
    similarity: HashMap<(usize, String, String), f64>,
}

pub struct OracleSuite {
    backend: Box<dyn OracleBackend>,
    property_names: Vec<String>,
    similarity_names: Vec<String>,
    decoder_count: AtomicU64,
    loss_count: AtomicU64,
    property_counts: Vec<AtomicU64>,
    similarity_counts: Vec<AtomicU64>,
    cache: Option<Mutex<Cache>>,
}

impl OracleSuite {
    pub fn new(backend: Box<dyn OracleBackend>) -> Self {
        let property_names = backend.property_names();
        let similarity_names = backend.similarity_names();
        OracleSuite {
            property_counts: property_names.iter().map(|_| AtomicU64::new(0)).collect(),
            similarity_counts: similarity_names.iter().map(|_| AtomicU64::new(0)).collect(),
            property_names,
            similarity_names,
            backend,
            decoder_count: AtomicU64::new(0),
            loss_count: AtomicU64::new(0),
            cache: None,
        }
    }

    pub fn with_cache(mut self, enabled: bool) -> Self {
        self.cache = enabled.then(|| Mutex::new(Cache::default()));
        self
    }

    pub fn caching(&self) -> bool {
        self.cache.is_some()
    }

    pub fn dim(&self) -> usize {
        self.backend.dim()
    }

    pub fn property_names(&self) -> &[String] {
        &self.property_names
    }

    pub fn similarity_names(&self) -> &[String] {
        &self.similarity_names
    }

    pub fn has_property(&self, name: &str) -> bool {
        self.property_names.iter().any(|n| n == name)
    }

    pub fn has_similarity(&self, name: &str) -> bool {
        self.similarity_names.iter().any(|n| n == name)
    }

    pub fn decode(&self, z: &LatentVector) -> Result<Sequence> {
        Ok(self.decode_batch(&[z])?.remove(0))
    }

    pub fn decode_batch(&self, zs: &[&LatentVector]) -> Result<Vec<Sequence>> {
        let d = self.dim();
        for z in zs {
            z.check_dim(d)?;
        }
        let Some(cache) = &self.cache else {
            self.decoder_count.fetch_add(zs.len() as u64, Ordering::Relaxed);
            let out = self.backend.decode_batch(zs)?;
            return expect_len(out, zs.len(), "decode");
        };
        let keys: Vec<Vec<u64>> = zs
            .iter()
            .map(|z| z.iter().map(|c| c.to_bits()).collect())
            .collect();
        let misses = {
            let cache = cache.lock().unwrap();
            unique_misses(&keys, |k| cache.decode.contains_key(k))
        };
        if !misses.is_empty() {
            let batch: Vec<&LatentVector> = misses.iter().map(|&i| zs[i]).collect();
            self.decoder_count.fetch_add(batch.len() as u64, Ordering::Relaxed);
            let out = expect_len(self.backend.decode_batch(&batch)?, batch.len(), "decode")?;
            let mut cache = cache.lock().unwrap();
            for (i, seq) in misses.into_iter().zip(out) {
                cache.decode.insert(keys[i].clone(), seq);
            }
        }
        let cache = cache.lock().unwrap();
        Ok(keys.iter().map(|k| cache.decode[k].clone()).collect())
    }

    pub fn eval_property(&self, name: &str, x: &Sequence) -> Result<f64> {
        Ok(self.property_batch(name, &[x])?[0])
    }

    pub fn property_batch(&self, name: &str, xs: &[&Sequence]) -> Result<Vec<f64>> {
        let idx = lookup(&self.property_names, name, "property")?;
        let counter = &self.property_counts[idx];
        let Some(cache) = &self.cache else {
            counter.fetch_add(xs.len() as u64, Ordering::Relaxed);
            return finite(self.backend.property_batch(name, xs)?, xs.len(), name);
        };
        let keys: Vec<(usize, String)> = xs.iter().map(|x| (idx, x.as_str().to_owned())).collect();
        let misses = {
            let cache = cache.lock().unwrap();
            unique_misses(&keys, |k| cache.property.contains_key(k))
        };
        if !misses.is_empty() {
            let batch: Vec<&Sequence> = misses.iter().map(|&i| xs[i]).collect();
            counter.fetch_add(batch.len() as u64, Ordering::Relaxed);
            let out = finite(self.backend.property_batch(name, &batch)?, batch.len(), name)?;
            let mut cache = cache.lock().unwrap();
            for (i, v) in misses.into_iter().zip(out) {
                cache.property.insert(keys[i].clone(), v);
            }
        }
        let cache = cache.lock().unwrap();
        Ok(keys.iter().map(|k| cache.property[k]).collect())
    }

    pub fn eval_similarity(&self, name: &str, x: &Sequence, refs: &ReferenceSet) -> Result<f64> {
        Ok(self.similarity_batch(name, &[x], refs)?[0])
    }

    pub fn similarity_batch(
        &self,
        name: &str,
        xs: &[&Sequence],
        refs: &ReferenceSet,
    ) -> Result<Vec<f64>> {
        let idx = lookup(&self.similarity_names, name, "similarity")?;
        let counter = &self.similarity_counts[idx];
        let Some(cache) = &self.cache else {
            counter.fetch_add(xs.len() as u64, Ordering::Relaxed);
            return finite(self.backend.similarity_batch(name, xs, refs)?, xs.len(), name);
        };
        let refs_key = refs.cache_key();
        let keys: Vec<(usize, String, String)> = xs
            .iter()
            .map(|x| (idx, x.as_str().to_owned(), refs_key.clone()))
            .collect();
        let misses = {
            let cache = cache.lock().unwrap();
            unique_misses(&keys, |k| cache.similarity.contains_key(k))
        };
        if !misses.is_empty() {
            let batch: Vec<&Sequence> = misses.iter().map(|&i| xs[i]).collect();
            counter.fetch_add(batch.len() as u64, Ordering::Relaxed);
            let out = finite(
                self.backend.similarity_batch(name, &batch, refs)?,
                batch.len(),
                name,
            )?;
            let mut cache = cache.lock().unwrap();
            for (i, v) in misses.into_iter().zip(out) {
                cache.similarity.insert(keys[i].clone(), v);
            }
        }
        let cache = cache.lock().unwrap();
        Ok(keys.iter().map(|k| cache.similarity[k]).collect())
    }

    /// Loss evaluations are counted by the loss layer, not by the backends.
    pub fn record_loss_evaluations(&self, n: u64) {
        self.loss_count.fetch_add(n, Ordering::Relaxed);
    }

    pub fn snapshot_query_counts(&self) -> QueryCounts {
        let named = |names: &[String], counts: &[AtomicU64]| {
            names
                .iter()
                .cloned()
                .zip(counts.iter().map(|c| c.load(Ordering::Relaxed)))
                .collect()
        };
        QueryCounts {
            decoder: self.decoder_count.load(Ordering::Relaxed),
            loss_evaluations: self.loss_count.load(Ordering::Relaxed),
            properties: named(&self.property_names, &self.property_counts),
            similarities: named(&self.similarity_names, &self.similarity_counts),
        }
    }

    pub fn reset_query_counts(&self) {
        self.decoder_count.store(0, Ordering::Relaxed);
        self.loss_count.store(0, Ordering::Relaxed);
        for c in self.property_counts.iter().chain(&self.similarity_counts) {
            c.store(0, Ordering::Relaxed);
        }
    }
}

impl std::fmt::Debug for OracleSuite {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OracleSuite")
            .field("dim", &self.dim())
            .field("properties", &self.property_names)
            .field("similarities", &self.similarity_names)
            .field("caching", &self.caching())
            .finish()
    }
}

fn lookup(names: &[String], name: &str, kind: &str) -> Result<usize> {
    names
        .iter()
        .position(|n| n == name)
        .ok_or_else(|| QmoError::Config(format!("unknown {kind} oracle {name:?}")))
}

/// Indices of first occurrences of keys that are not yet cached.
fn unique_misses<K: Eq + std::hash::Hash>(keys: &[K], cached: impl Fn(&K) -> bool) -> Vec<usize> {
    let mut seen = std::collections::HashSet::new();
    keys.iter()
        .enumerate()
        .filter(|(_, k)| !cached(k) && seen.insert(*k))
        .map(|(i, _)| i)
        .collect()
}

fn expect_len<T>(out: Vec<T>, n: usize, what: &str) -> Result<Vec<T>> {
    if out.len() != n {
        return Err(QmoError::oracle(format!(
            "{what} oracle returned {} values for {n} inputs",
            out.len()
        )));
    }
    Ok(out)
}

fn finite(out: Vec<f64>, n: usize, name: &str) -> Result<Vec<f64>> {
    let out = expect_len(out, n, name)?;
    if let Some(v) = out.iter().find(|v| !v.is_finite()) {
        return Err(QmoError::oracle_with_payload(
            format!("oracle {name:?} returned a non-finite value"),
            v.to_string(),
        ));
    }
    Ok(out)
}
