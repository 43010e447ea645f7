use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use trivoc::bench::{
    aggregate, generate_instance, run_sweep, write_csv, BuiltinCloud, SolverKind, SourceCloud, SweepConfig,
    SyntheticScenario,
};
use trivoc::geometry::NoiseModel;
use trivoc::io::correspondences::{format_correspondences, read_correspondence_file};
use trivoc::io::ply::read_ply_file;
use trivoc::io::report::{to_one_based, GroundTruthSidecar, OracleReport, RegistrationReport};
use trivoc::oracle::exhaustive_consensus_oracle;
use trivoc::ransac::{ransac_register, RansacConfig};
use trivoc::solver::{register, RegistrationError, TrivocConfig};

const EXIT_INPUT: u8 = 1;
const EXIT_NO_CONSENSUS: u8 = 2;

#[derive(Parser)]
#[command(name = "trivoc", version, about = "Robust point cloud registration from putative correspondences")]
struct Cli {
    /// Worker threads for matrix construction and sweeps (default: all cores)
    #[arg(long, global = true, env = "TRIVOC_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the rigid transform for a correspondence file
    Register(RegisterArgs),
    /// Run a Monte-Carlo sweep on synthetic instances and write CSV
    Bench(BenchArgs),
    /// Write a synthetic correspondence file and its ground-truth sidecar
    Generate(GenerateArgs),
    /// Exhaustive maximum-consensus search (at most 40 correspondences)
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Trivoc,
    Ransac,
}

#[derive(Args)]
struct NoiseArgs {
    /// Noise standard deviation in meters
    #[arg(long, env = "TRIVOC_SIGMA")]
    sigma: f64,
    /// Inlier threshold as a multiple of sigma
    #[arg(long, env = "TRIVOC_GAMMA_MULTIPLIER", default_value_t = NoiseModel::DEFAULT_MULTIPLIER)]
    gamma_multiplier: f64,
}

impl NoiseArgs {
    fn model(&self) -> NoiseModel {
        NoiseModel::with_multiplier(self.sigma, self.gamma_multiplier)
    }
}

#[derive(Args)]
struct RegisterArgs {
    /// Six-column correspondence file
    #[arg(long)]
    correspondences: PathBuf,
    #[command(flatten)]
    noise: NoiseArgs,
    #[arg(long, value_enum, env = "TRIVOC_SOLVER", default_value = "trivoc")]
    solver: SolverArg,
    /// RANSAC sampling seed
    #[arg(long, env = "TRIVOC_SEED", default_value_t = 0)]
    seed: u64,
    /// Confidence of the iteration bounds
    #[arg(long, default_value_t = 0.99)]
    confidence: f64,
    /// RANSAC iteration limit
    #[arg(long, default_value_t = RansacConfig::DEFAULT_MAX_ITERATIONS)]
    max_iterations: u64,
    /// Ground-truth sidecar; enables pure-inlier counters
    #[arg(long)]
    ground_truth: Option<PathBuf>,
    /// Write JSON here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CloudArg {
    /// Source cloud: `box`, `shell`, or a PLY path
    #[arg(long, default_value = "shell")]
    cloud: String,
}

impl CloudArg {
    fn source(&self) -> Result<SourceCloud, String> {
        if let Some(b) = BuiltinCloud::from_name(&self.cloud) {
            return Ok(SourceCloud::Builtin(b));
        }
        let cloud = read_ply_file(Path::new(&self.cloud)).map_err(|e| e.to_string())?;
        Ok(SourceCloud::Points(Arc::new(cloud.points)))
    }
}

#[derive(Args)]
struct BenchArgs {
    /// `N1,N2,...:R1,R2,...` (sizes and outlier ratios), or `full`
    #[arg(long)]
    grid: String,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    /// CSV output path
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated solver list
    #[arg(long, default_value = "trivoc,ransac")]
    solvers: String,
    #[arg(long, env = "TRIVOC_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, env = "TRIVOC_SIGMA", default_value_t = SyntheticScenario::DEFAULT_SIGMA)]
    sigma: f64,
    #[arg(long, env = "TRIVOC_GAMMA_MULTIPLIER", default_value_t = NoiseModel::DEFAULT_MULTIPLIER)]
    gamma_multiplier: f64,
    #[command(flatten)]
    cloud: CloudArg,
    /// Also write per-cell summary statistics as JSON
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    n: usize,
    /// Outlier ratio in [0, 0.99]
    #[arg(long)]
    ratio: f64,
    #[arg(long, env = "TRIVOC_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, env = "TRIVOC_SIGMA", default_value_t = SyntheticScenario::DEFAULT_SIGMA)]
    sigma: f64,
    #[command(flatten)]
    cloud: CloudArg,
    /// Writes `<prefix>.txt` and `<prefix>.truth.json`
    #[arg(long)]
    out_prefix: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    correspondences: PathBuf,
    #[command(flatten)]
    noise: NoiseArgs,
}

/// Sizes and ratios swept by `--grid full`.
const FULL_NS: [usize; 3] = [100, 500, 1000];
const FULL_RATIOS: [f64; 9] = [0.2, 0.5, 0.8, 0.9, 0.95, 0.96, 0.97, 0.98, 0.99];

fn parse_grid(grid: &str) -> Result<(Vec<usize>, Vec<f64>), String> {
    if grid == "full" {
        return Ok((FULL_NS.to_vec(), FULL_RATIOS.to_vec()));
    }
    let (ns, ratios) = grid
        .split_once(':')
        .ok_or_else(|| format!("grid '{grid}' must look like N1,N2:R1,R2"))?;
    let ns = ns
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| format!("bad size '{t}' in grid")))
        .collect::<Result<Vec<_>, _>>()?;
    let ratios = ratios
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad ratio '{t}' in grid")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((ns, ratios))
}

fn emit(json: &str, out: Option<&Path>) -> Result<(), String> {
    match out {
        Some(path) => fs::write(path, format!("{json}\n")).map_err(|e| format!("writing {}: {e}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{json}").map_err(|e| e.to_string())
        }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize")
}

fn cmd_register(args: &RegisterArgs) -> Result<ExitCode, String> {
    let corr = read_correspondence_file(&args.correspondences).map_err(|e| e.to_string())?;
    let inliers = match &args.ground_truth {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| format!("reading {}: {e}", path.display()))?;
            let truth: GroundTruthSidecar =
                serde_json::from_str(&text).map_err(|e| format!("parsing {}: {e}", path.display()))?;
            Some(
                trivoc::io::report::from_one_based(&truth.inlier_indices)
                    .ok_or("ground-truth indices are 1-based; found 0")?,
            )
        }
        None => None,
    };
    let noise = args.noise.model();
    let (solver, start) = (args.solver, Instant::now());
    let outcome = match solver {
        SolverArg::Trivoc => {
            let cfg = TrivocConfig {
                confidence: args.confidence,
                ..TrivocConfig::new(noise)
            };
            register(&corr, &cfg, inliers.as_deref())
        }
        SolverArg::Ransac => {
            let cfg = RansacConfig {
                max_iterations: args.max_iterations,
                confidence: args.confidence,
                ..RansacConfig::new(noise.gamma(), args.seed)
            };
            ransac_register(&corr, &cfg, inliers.as_deref())
        }
    };
    let runtime = start.elapsed().as_secs_f64();
    let name = match solver {
        SolverArg::Trivoc => "trivoc",
        SolverArg::Ransac => "ransac",
    };
    match outcome {
        Ok(result) => {
            emit(&to_json(&RegistrationReport::new(name, &result, None, runtime)), args.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Err(RegistrationError::NoConsensusFound(best)) => {
            let msg = format!("no triad reached a consensus of 3 (best {})", best.consensus.size());
            eprintln!("trivoc: {msg}");
            emit(&to_json(&RegistrationReport::new(name, &best, Some(msg), runtime)), args.out.as_deref())?;
            Ok(ExitCode::from(EXIT_NO_CONSENSUS))
        }
        Err(e) => Err(e.to_string()),
    }
}

fn cmd_bench(args: &BenchArgs) -> Result<ExitCode, String> {
    let (ns, ratios) = parse_grid(&args.grid)?;
    let solvers = args
        .solvers
        .split(',')
        .map(|s| SolverKind::from_name(s.trim()).ok_or_else(|| format!("unknown solver '{s}'")))
        .collect::<Result<Vec<_>, _>>()?;
    let cfg = SweepConfig {
        master_seed: args.seed,
        sigma: args.sigma,
        threshold_multiplier: args.gamma_multiplier,
        source: args.cloud.source()?,
        ..SweepConfig::new(ns, ratios, args.trials, solvers)
    };
    let records = run_sweep(&cfg).map_err(|e| e.to_string())?;
    let file = fs::File::create(&args.out).map_err(|e| format!("creating {}: {e}", args.out.display()))?;
    write_csv(&records, std::io::BufWriter::new(file)).map_err(|e| e.to_string())?;
    if let Some(path) = &args.summary {
        emit(&to_json(&aggregate(&records)), Some(path))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_generate(args: &GenerateArgs) -> Result<ExitCode, String> {
    let scenario = SyntheticScenario {
        sigma: args.sigma,
        source: args.cloud.source()?,
        ..SyntheticScenario::new(args.n, args.ratio, args.seed)
    };
    let inst = generate_instance(&scenario).map_err(|e| e.to_string())?;
    let prefix = args.out_prefix.display();
    let corr_path = PathBuf::from(format!("{prefix}.txt"));
    let truth_path = PathBuf::from(format!("{prefix}.truth.json"));
    fs::write(&corr_path, format_correspondences(&inst.correspondences))
        .map_err(|e| format!("writing {}: {e}", corr_path.display()))?;
    let truth = GroundTruthSidecar {
        n: scenario.n,
        outlier_ratio: scenario.outlier_ratio,
        sigma: scenario.sigma,
        seed: scenario.seed,
        source: args.cloud.cloud.clone(),
        rotation: inst.ground_truth.rotation_rows(),
        translation: inst.ground_truth.translation.into(),
        inlier_indices: to_one_based(&inst.inliers),
        outlier_indices: to_one_based(&inst.outliers),
    };
    emit(&to_json(&truth), Some(&truth_path))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_oracle(args: &OracleArgs) -> Result<ExitCode, String> {
    let corr = read_correspondence_file(&args.correspondences).map_err(|e| e.to_string())?;
    let result = exhaustive_consensus_oracle(&corr, args.noise.model().gamma()).map_err(|e| e.to_string())?;
    emit(&to_json(&OracleReport::from(&result)), None)?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_INPUT);
        }
    };
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("trivoc: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
    }
    let outcome = match &cli.command {
        Command::Register(a) => cmd_register(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Oracle(a) => cmd_oracle(a),
    };
    outcome.unwrap_or_else(|msg| {
        eprintln!("trivoc: {msg}");
        ExitCode::from(EXIT_INPUT)
    })
}
