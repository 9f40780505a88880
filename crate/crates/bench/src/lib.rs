//! Seeded fixtures shared by the benchmarks.

use qmo::config::{Prepared, QmoSetup, RunConfig};
use qmo::metrics::Fingerprint;
use qmo::rng::{stream, Role};
use qmo::testbed::SmoothProblem;
use qmo::LatentVector;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub const AMINO: &[u8] = b"ARNDCQEGHILKMFPSTWYV";

pub fn gaussian(d: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream(seed, Role::Problem, 0);
    (0..d).map(|_| StandardNormal.sample(&mut rng)).collect()
}

pub fn quadratic(d: usize) -> (SmoothProblem, LatentVector) {
    let problem = SmoothProblem::Quadratic { center: gaussian(d, 1) };
    (problem, LatentVector::new(gaussian(d, 2)).expect("finite"))
}

pub fn protein(len: usize, seed: u64) -> String {
    let mut rng = stream(seed, Role::Problem, 1);
    (0..len).map(|_| AMINO[rng.random_range(0..AMINO.len())] as char).collect()
}

pub fn fingerprint(width: usize, density: f64, seed: u64) -> Fingerprint {
    let mut rng = stream(seed, Role::Problem, 2);
    let bits: Vec<usize> = (0..width).filter(|_| rng.random::<f64>() < density).collect();
    Fingerprint::from_bits(width, bits).expect("bits in range")
}

/// The m = 6, k = 4 codebook task with one start.
pub fn codebook() -> QmoSetup {
    let cfg = RunConfig::parse(
        r#"
[objective]
mode = "case_i"
start = "CGTCGT"
constraints = [{ name = "frac_A", threshold = 0.5 }]
scores = [{ name = "align", coefficient = 0.01 }]
[oracle]
testbed = "codebook"
alphabet = "ACGT"
length = 6
properties = [{ name = "frac_A", kind = "frac_of_symbol", symbol = "A" }]
similarities = [{ name = "align", kind = "alignment" }]
"#,
    )
    .expect("fixture parses");
    match cfg.prepare().expect("fixture prepares") {
        Prepared::Qmo(setup) => setup,
        Prepared::Smooth { .. } => unreachable!(),
    }
}
