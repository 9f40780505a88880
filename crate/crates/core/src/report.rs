//! Output artifacts. Everything except the metadata file is a pure function
//! of the configuration, so reruns are byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::landscape::GridCell;
use crate::oracle::QueryCounts;
use crate::solver::{Candidate, SolutionSet};
use crate::types::LatentVector;

pub const TRAJECTORY_CSV: &str = "trajectory.csv";
pub const TRAJECTORY_LATENTS: &str = "trajectory_latents.f64";
pub const SOLUTIONS_JSON: &str = "solutions.json";
pub const METADATA_JSON: &str = "metadata.json";

/// Config hash and seed stamped into every artifact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_sha256: String,
    pub seed: u64,
}

impl Provenance {
    /// Leading CSV comment line.
    pub fn header(&self) -> String {
        format!("# config_sha256={} seed={}\n", self.config_sha256, self.seed)
    }
}

/// 17 significant digits; round-trips every f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// `restart,iter,loss,valid,<properties>,<similarities>`, one row per iterate.
pub fn trajectory_csv<'a>(
    prov: &Provenance,
    property_names: &[String],
    similarity_names: &[String],
    candidates: impl IntoIterator<Item = &'a Candidate>,
) -> String {
    let mut out = prov.header();
    out.push_str("restart,iter,loss,valid");
    for n in property_names.iter().chain(similarity_names) {
        out.push(',');
        out.push_str(n);
    }
    out.push('\n');
    for c in candidates {
        let _ = write!(out, "{},{},{},{}", c.restart, c.iteration, fmt_f64(c.loss), c.valid);
        for v in c.properties.iter().chain(&c.similarities) {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    out
}

/// Iterates as little-endian f64, row-major (one row of `d` per iterate, in
/// trajectory order).
pub fn latent_bytes<'a>(candidates: impl IntoIterator<Item = &'a Candidate>) -> Vec<u8> {
    candidates
        .into_iter()
        .flat_map(|c| c.latent.as_slice().iter().flat_map(|v| v.to_le_bytes()))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionsDoc {
    pub config_sha256: String,
    pub seed: u64,
    pub start_sequence: Option<String>,
    pub z0: Vec<f64>,
    pub dim: usize,
    pub rows: usize,
    pub latent_file: String,
    /// Row range `[begin, end)` in the latent file holding the best
    /// candidate's restart.
    pub best_rows: Option<[usize; 2]>,
    pub property_names: Vec<String>,
    pub similarity_names: Vec<String>,
    pub best: Option<Candidate>,
    pub solutions: Vec<Candidate>,
}

impl SolutionsDoc {
    pub fn new(
        prov: &Provenance,
        start_sequence: Option<String>,
        z0: Vec<f64>,
        trajectory: &[Candidate],
        property_names: Vec<String>,
        similarity_names: Vec<String>,
        set: &SolutionSet,
    ) -> Self {
        let best_rows = set.best.as_ref().map(|b| {
            let begin = trajectory.iter().position(|c| c.restart == b.restart).unwrap_or(0);
            let len = trajectory[begin..].iter().take_while(|c| c.restart == b.restart).count();
            [begin, begin + len]
        });
        SolutionsDoc {
            config_sha256: prov.config_sha256.clone(),
            seed: prov.seed,
            start_sequence,
            dim: z0.len(),
            z0,
            rows: trajectory.len(),
            latent_file: TRAJECTORY_LATENTS.to_string(),
            best_rows,
            property_names,
            similarity_names,
            best: set.best.clone(),
            solutions: set.candidates.clone(),
        }
    }

    /// Latent of the selected best candidate.
    pub fn z_star(&self) -> Option<&LatentVector> {
        self.best.as_ref().map(|b| &b.latent)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("solutions serialize");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub command: String,
    #[serde(flatten)]
    pub provenance: Provenance,
    pub query_counts: QueryCounts,
    pub wall_time_secs: f64,
    pub log_base: String,
    pub projection_convention: String,
    /// Loss at the last verified iterate of each restart.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub final_losses: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Metadata {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("metadata serializes");
        s.push('\n');
        s
    }
}

/// `x,y,<similarities>,<properties>,valid`, x-major.
pub fn grid_csv(prov: &Provenance, property_names: &[String], similarity_names: &[String], cells: &[GridCell]) -> String {
    let mut out = prov.header();
    out.push_str("x,y");
    for n in similarity_names.iter().chain(property_names) {
        out.push(',');
        out.push_str(n);
    }
    out.push_str(",valid\n");
    for c in cells {
        let _ = write!(out, "{},{}", fmt_f64(c.x), fmt_f64(c.y));
        for v in c.similarities.iter().chain(&c.properties) {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        let _ = writeln!(out, ",{}", c.valid);
    }
    out
}

pub fn projection_csv(prov: &Provenance, points: &[(usize, f64, f64)]) -> String {
    let mut out = prov.header();
    out.push_str("iter,x,y\n");
    for (i, x, y) in points {
        let _ = writeln!(out, "{i},{},{}", fmt_f64(*x), fmt_f64(*y));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityRow {
    pub setting: String,
    pub starts: usize,
    pub successes: usize,
}

impl StabilityRow {
    pub fn rate(&self) -> f64 {
        if self.starts == 0 {
            0.0
        } else {
            self.successes as f64 / self.starts as f64
        }
    }
}

pub fn stability_csv(prov: &Provenance, rows: &[StabilityRow]) -> String {
    let mut out = prov.header();
    out.push_str("setting,starts,successes,rate\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.setting, r.starts, r.successes, fmt_f64(r.rate()));
    }
    out
}

/// Writes `contents` to `dir/name`, creating `dir` as needed.
pub fn write_artifact(dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prov() -> Provenance {
        Provenance {
            config_sha256: "ab".into(),
            seed: 9,
        }
    }

    fn cand(iteration: usize, loss: f64, valid: bool) -> Candidate {
        Candidate {
            restart: 0,
            iteration,
            latent: LatentVector::new(vec![1.0, -0.5]).unwrap(),
            sequence: None,
            properties: vec![0.25],
            similarities: vec![3.0],
            loss,
            score: 0.1,
            valid,
        }
    }

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_f64(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn trajectory_layout() {
        let cs = [cand(0, 0.5, false), cand(1, -0.25, true)];
        let csv = trajectory_csv(&prov(), &["p".into()], &["s".into()], &cs);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# config_sha256=ab seed=9");
        assert_eq!(lines[1], "restart,iter,loss,valid,p,s");
        assert_eq!(lines.len(), 4);
        assert!(lines[3].starts_with("0,1,-2.5000000000000000e-1,true,"));
        let bytes = latent_bytes(&cs);
        assert_eq!(bytes.len(), 2 * 2 * 8);
        assert_eq!(f64::from_le_bytes(bytes[8..16].try_into().unwrap()), -0.5);
    }

    #[test]
    fn grid_and_stability_layout() {
        let cell = GridCell {
            x: 0.0,
            y: 1.0,
            similarities: vec![2.0],
            properties: vec![0.5],
            valid: true,
        };
        let csv = grid_csv(&prov(), &["p".into()], &["s".into()], &[cell]);
        assert_eq!(csv.lines().nth(1).unwrap(), "x,y,s,p,valid");
        assert!(csv.ends_with(",true\n"));
        let rows = [StabilityRow {
            setting: "restarts=5".into(),
            starts: 4,
            successes: 3,
        }];
        assert!(stability_csv(&prov(), &rows).contains("restarts=5,4,3,7.5000000000000000e-1"));
    }

    #[test]
    fn solutions_json_parses_back() {
        let traj = vec![cand(0, 0.5, false), cand(1, -0.25, true)];
        let set = SolutionSet::from_candidates(traj.clone());
        let doc = SolutionsDoc::new(&prov(), Some("AC".into()), vec![1.0, 0.0], &traj, vec!["p".into()], vec!["s".into()], &set);
        assert_eq!(doc.best_rows, Some([0, 2]));
        let back: SolutionsDoc = serde_json::from_str(&doc.to_json()).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.solutions.len(), 1);
    }
}
