use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use qmo::config::RunConfig;
use qmo::driver::{self, JobOutput, JobStatus, LandscapeOptions, StabilitySweep};
use qmo::landscape::GridMode;
use qmo::report::{SolutionsDoc, SOLUTIONS_JSON};
use qmo::QmoError;

/// Query-based latent-space optimization driver.
///
/// Exit status: 0 solution found, 1 configuration error, 2 oracle failure,
/// 3 finished without a valid solution.
#[derive(Parser, Debug)]
#[command(name = "qmo", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// TOML run configuration.
    config: PathBuf,
    /// Overrides the config's top-level seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's output directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Replaces the configured oracle with a subprocess (`sh -c <CMD>`).
    #[arg(long, value_name = "CMD")]
    oracle_cmd: Option<String>,
    /// Worker threads for restarts and starts (default: all cores).
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimize from the configured start and write trajectory and solutions.
    Run(Common),
    /// Success counts over all configured starts for a restarts or Q sweep.
    Stability {
        #[command(flatten)]
        common: Common,
        /// Comma-separated restart budgets, e.g. 1,5,20.
        #[arg(long, value_delimiter = ',', conflicts_with = "queries", required_unless_present = "queries")]
        restarts: Vec<usize>,
        /// Comma-separated Q values, e.g. 10,100.
        #[arg(long = "queries", visible_alias = "q", value_delimiter = ',')]
        queries: Vec<usize>,
    },
    /// Evaluate a 2-D grid around a solution and project its trajectory.
    Landscape {
        #[command(flatten)]
        common: Common,
        /// Solutions JSON from `qmo run` (default: <out-dir>/solutions.json).
        #[arg(long)]
        solution: Option<PathBuf>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Number of grids, each with its own random direction(s).
        #[arg(long)]
        grids: Option<usize>,
    },
    /// Serve the configured codebook testbed over the subprocess protocol.
    #[command(hide = true)]
    ServeTestbed { config: PathBuf },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Principal,
    Random,
}

impl From<ModeArg> for GridMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Principal => GridMode::Principal,
            ModeArg::Random => GridMode::Random,
        }
    }
}

/// A failure plus the exit status it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<QmoError> for Failure {
    fn from(e: QmoError) -> Self {
        Failure {
            code: driver::error_exit_code(&e) as u8,
            error: e.into(),
        }
    }
}

fn config_failure(error: anyhow::Error) -> Failure {
    Failure { code: 1, error }
}

fn load(common: &Common) -> Result<RunConfig, Failure> {
    let mut cfg = RunConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = &common.out_dir {
        cfg.out_dir = dir.clone();
    }
    if let Some(cmd) = &common.oracle_cmd {
        cfg.override_oracle_command(cmd.clone())?;
    }
    if let Some(n) = common.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring --jobs")
            .map_err(config_failure)?;
    }
    Ok(cfg)
}

fn finish(cfg: &RunConfig, out: JobOutput) -> Result<u8, Failure> {
    out.write_to(&cfg.out_dir)
        .with_context(|| format!("writing artifacts to {}", cfg.out_dir.display()))
        .map_err(config_failure)?;
    for line in &out.summary {
        println!("{line}");
    }
    match &out.status {
        JobStatus::Solved => {}
        JobStatus::NoSolution => eprintln!("no valid solution found"),
        JobStatus::OracleFailure(e) => eprintln!("error: oracle failure: {e}"),
    }
    println!("artifacts written to {}", cfg.out_dir.display());
    Ok(out.status.exit_code() as u8)
}

fn read_solution(path: &Path) -> anyhow::Result<(SolutionsDoc, Vec<u8>)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc: SolutionsDoc = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let latents_path = path.parent().unwrap_or(Path::new(".")).join(&doc.latent_file);
    let latents = std::fs::read(&latents_path).with_context(|| format!("reading {}", latents_path.display()))?;
    Ok((doc, latents))
}

fn dispatch(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Run(common) => {
            let cfg = load(&common)?;
            let out = driver::run_job(&cfg)?;
            finish(&cfg, out)
        }
        Command::Stability {
            common,
            restarts,
            queries,
        } => {
            let cfg = load(&common)?;
            let sweep = if restarts.is_empty() {
                StabilitySweep::Queries(queries)
            } else {
                StabilitySweep::Restarts(restarts)
            };
            let out = driver::stability_job(&cfg, &sweep)?;
            finish(&cfg, out)
        }
        Command::Landscape {
            common,
            solution,
            mode,
            grids,
        } => {
            let cfg = load(&common)?;
            let path = solution.unwrap_or_else(|| cfg.out_dir.join(SOLUTIONS_JSON));
            let (doc, latents) = read_solution(&path).map_err(config_failure)?;
            let trajectory = driver::best_trajectory(&doc, &latents)?;
            let opts = LandscapeOptions {
                mode: mode.map(Into::into),
                grids,
            };
            let out = driver::landscape_job(&cfg, &doc, &trajectory, &opts)?;
            finish(&cfg, out)
        }
        Command::ServeTestbed { config } => {
            let cfg = RunConfig::load(&config)?;
            let backend = cfg.testbed_oracle()?;
            qmo::oracle::serve(io::stdin().lock(), io::stdout().lock(), &backend)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
