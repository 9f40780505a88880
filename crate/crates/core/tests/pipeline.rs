use qmo::config::{Prepared, QmoSetup, RunConfig};
use qmo::driver::{run_job, JobStatus};
use qmo::landscape::{evaluate_grid, principal_grid, Axis};
use qmo::loss::{BatchLoss, QmoLoss};
use qmo::report;
use qmo::rng::{stream, Role};
use qmo::solver::{run, run_with_restarts, SolverConfig, StepSchedule};
use qmo::testbed::SmoothProblem;
use qmo::zo::{estimate_gradient_batched, sample_directions, EstimatorConfig};
use qmo::{LatentVector, OptimizerKind, Sequence};

const BASE: &str = r#"
seed = 2
[objective]
mode = "case_i"
start = "CGTCGT"
constraints = [{ name = "frac_A", threshold = 0.5 }]
scores = [{ name = "align", coefficient = 0.01 }]
[solver]
T = 40
Q = 30
beta = 2.0
[oracle]
testbed = "codebook"
alphabet = "ACGT"
length = 6
properties = [{ name = "frac_A", kind = "frac_of_symbol", symbol = "A" }]
similarities = [
  { name = "align", kind = "alignment" },
  { name = "norm", kind = "normalized_alignment" },
  { name = "fp", kind = "tanimoto", width = 256, k = 2 },
]
"#;

fn setup(text: &str) -> (RunConfig, QmoSetup) {
    let cfg = RunConfig::parse(text).unwrap();
    match cfg.prepare().unwrap() {
        Prepared::Qmo(s) => (cfg, s),
        Prepared::Smooth { .. } => panic!("expected a sequence problem"),
    }
}

#[test]
fn estimator_moves_off_a_plateau_near_a_block_boundary() {
    let (_, s) = setup(BASE);
    let start = &s.starts[0];
    let objective = s.objective_for(start);
    let loss = QmoLoss::new(&objective, &s.suite).unwrap();
    // First block sits 0.05 from flipping C to A.
    let mut z = start.latent.to_vec();
    z[0] = 0.95;
    let z = LatentVector::new(z).unwrap();
    assert_eq!(s.suite.decode(&z).unwrap().as_str(), "CGTCGT");
    let cfg = EstimatorConfig::new(10, 1.0).unwrap();
    let nonzero = (0..20).any(|seed| {
        let dirs = sample_directions(z.dim(), 10, &mut stream(seed, Role::Directions, 0)).unwrap();
        let g = estimate_gradient_batched(
            |zs| {
                Ok(loss
                    .evaluate_batch(zs)?
                    .into_iter()
                    .map(|a| a.loss)
                    .collect())
            },
            &z,
            &cfg,
            &dirs,
        )
        .unwrap();
        g.iter().any(|&v| v != 0.0)
    });
    assert!(nonzero);
}

#[test]
fn grid_decodes_each_cell_once() {
    let (_, s) = setup(BASE);
    let start = &s.starts[0];
    let objective = s.objective_for(start);
    let z_star = s
        .decoder
        .as_ref()
        .unwrap()
        .encode(&Sequence::new("AGAAGT").unwrap())
        .unwrap();
    let grid = principal_grid(
        &start.latent,
        &z_star,
        Axis::new(-0.5, 1.5, 9).unwrap(),
        Axis::new(-2.0, 2.0, 7).unwrap(),
        &mut stream(2, Role::Landscape, 0),
    )
    .unwrap();
    s.suite.reset_query_counts();
    let cells = evaluate_grid(&grid, &objective, &s.suite).unwrap();
    assert_eq!(cells.len(), 9 * 7);
    assert_eq!(s.suite.snapshot_query_counts().decoder, 63);
    let origin = cells.iter().find(|c| c.x == 0.0 && c.y == 0.0).unwrap();
    let star = cells.iter().find(|c| c.x == 1.0 && c.y == 0.0).unwrap();
    assert!(!origin.valid);
    assert!(star.valid);
    assert_eq!(star.properties, vec![0.5]);
}

#[test]
fn case_ii_keeps_similarity_and_raises_property() {
    let text = BASE
        .replace("mode = \"case_i\"", "mode = \"case_ii\"")
        .replace(
            "constraints = [{ name = \"frac_A\", threshold = 0.5 }]",
            "constraints = [{ name = \"norm\", threshold = 0.4 }]",
        )
        .replace(
            "scores = [{ name = \"align\", coefficient = 0.01 }]",
            "scores = [{ name = \"frac_A\", coefficient = 1.0 }]",
        )
        .replace("T = 40", "T = 60\nrestarts = 4");
    let (cfg, s) = setup(&text);
    let rep = {
        let start = &s.starts[0];
        let objective = s.objective_for(start);
        let loss = QmoLoss::new(&objective, &s.suite).unwrap();
        run_with_restarts(&loss, &cfg.solver_config(), &start.latent).unwrap()
    };
    let best = rep
        .solutions
        .best
        .as_ref()
        .expect("start is already feasible");
    assert!(rep
        .solutions
        .candidates
        .iter()
        .all(|c| c.similarities[0] >= 0.4));
    assert!(best.properties[0] > 0.0, "frac_A should improve from 0");
    assert_eq!(best.score, best.properties[0]);
}

#[test]
fn tanimoto_similarity_objective_runs() {
    let text = BASE
        .replace(
            "name = \"align\", coefficient = 0.01",
            "name = \"fp\", coefficient = 0.1",
        )
        .replace("T = 40", "T = 40\nrestarts = 4");
    let out = run_job(&RunConfig::parse(&text).unwrap()).unwrap();
    assert_eq!(out.status, JobStatus::Solved);
    let doc: report::SolutionsDoc =
        serde_json::from_slice(out.artifact(report::SOLUTIONS_JSON).unwrap()).unwrap();
    assert_eq!(doc.similarity_names, vec!["fp".to_string()]);
    let best = doc.best.unwrap();
    assert!(best.similarities[0] > 0.0 && best.similarities[0] <= 1.0);
}

#[test]
fn gd_variants_descend_on_quadratic() {
    let problem = SmoothProblem::Quadratic {
        center: vec![1.0; 20],
    };
    for schedule in [StepSchedule::Constant, StepSchedule::InvSqrt] {
        let cfg = SolverConfig {
            optimizer: OptimizerKind::ZoGd,
            alpha0: 0.05,
            iterations: 200,
            queries: 20,
            beta: 1e-3,
            schedule,
            ..SolverConfig::default()
        };
        let loss = problem.as_loss(0.0);
        let out = run(&loss, &cfg, &LatentVector::zeros(20), 0).unwrap();
        let first = out.trajectory[0].loss;
        let last = out.trajectory.last().unwrap().loss;
        assert!(last < 0.05 * first, "{schedule:?}: {first} -> {last}");
    }
}

#[test]
fn caching_cuts_decoder_calls_without_changing_results() {
    let plain = run_job(&RunConfig::parse(BASE).unwrap()).unwrap();
    let cached_cfg =
        RunConfig::parse(&BASE.replace("length = 6", "length = 6\ncache = true")).unwrap();
    let cached = run_job(&cached_cfg).unwrap();
    let body = |o: &qmo::driver::JobOutput| {
        String::from_utf8(o.artifact(report::TRAJECTORY_CSV).unwrap().to_vec())
            .unwrap()
            .lines()
            .skip(1)
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(body(&plain), body(&cached));
    let calls = |o: &qmo::driver::JobOutput| {
        let meta: serde_json::Value =
            serde_json::from_slice(o.artifact(report::METADATA_JSON).unwrap()).unwrap();
        meta["query_counts"]["properties"]["frac_A"]
            .as_u64()
            .unwrap()
    };
    assert!(calls(&cached) < calls(&plain));
}
