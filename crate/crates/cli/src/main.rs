//! `phaserepo`: solve phase retrieval problems, compare initializers, run
//! multi-algorithm benchmarks, and inspect dataset containers.

mod config;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex;

use phaserepo_core::benchmark::{
    records_to_csv, run_benchmark, summarize, summary_to_csv, BenchmarkAxis, BenchmarkGrid,
};
use phaserepo_core::datasets::{load_image_signal, load_tm, TmDataset};
use phaserepo_core::eigensolve::EigOptions;
use phaserepo_core::gradient::SolveOptions;
use phaserepo_core::initializers::{InitResult, InitSpec, INIT_NAMES};
use phaserepo_core::linalg;
use phaserepo_core::metrics::{phase_aligned_error, rel_measurement_error};
use phaserepo_core::operators::{make_gaussian_instance, GaussianSpec, Instance};
use phaserepo_core::solvers::Algorithm;
use phaserepo_core::Error as CoreError;

use config::{env_seed, write_atomic, ConfigMap, SyntheticSpec};

#[derive(Debug)]
pub enum CliError {
    /// Usage, configuration, or I/O problems (exit code 1).
    Usage(String),
    /// Numeric failure inside a solver (exit code 2).
    Numeric(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Numeric(msg) => write!(f, "numeric failure: {msg}"),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Numeric { .. } => CliError::Numeric(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numeric(_) => 2,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "phaserepo",
    version,
    about = "Phase retrieval solvers, initializers, and benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a single instance with one algorithm.
    Solve(SolveArgs),
    /// Sweep algorithms across a benchmark axis and emit CSV + plot script.
    Benchmark(BenchmarkArgs),
    /// Evaluate initializer alignment against known ground truth.
    InitEval(InitEvalArgs),
    /// Print header and statistics of a dataset container.
    DatasetInfo(DatasetInfoArgs),
    /// Generate a synthetic dataset container (optionally from an image).
    MakeSynthetic(MakeSyntheticArgs),
}

#[derive(Args, Clone, Default)]
struct SourceArgs {
    /// Synthetic instance: n=..,m=..,seed=..[,snr=..][,variance=..]
    #[arg(long)]
    synthetic: Option<String>,
    /// Dataset container path (.tmds)
    #[arg(long)]
    dataset: Option<PathBuf>,
}

#[derive(Args, Clone, Default)]
struct SolverOptArgs {
    /// Gradient/fixed-point tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration (or sweep) budget
    #[arg(long)]
    max_iters: Option<usize>,
    /// Non-monotone line-search window
    #[arg(long)]
    window: Option<usize>,
}

#[derive(Args)]
struct SolveArgs {
    /// Algorithm name
    #[arg(long)]
    alg: Option<String>,
    /// Initializer name
    #[arg(long)]
    init: Option<String>,
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    solver: SolverOptArgs,
    /// Output prefix for trace and reconstruction files
    #[arg(long)]
    out: Option<String>,
    /// Flat key=value config file
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Comma-separated algorithm names
    #[arg(long)]
    alg: Option<String>,
    #[arg(long)]
    init: Option<String>,
    #[command(flatten)]
    source: SourceArgs,
    /// Benchmark axis: ratio | snr | iterations | time
    #[arg(long)]
    axis: Option<String>,
    /// Comma-separated axis values
    #[arg(long)]
    values: Option<String>,
    /// Trials per axis point
    #[arg(long)]
    trials: Option<usize>,
    #[command(flatten)]
    solver: SolverOptArgs,
    /// Output prefix for records/summary/plot files
    #[arg(long)]
    out: Option<String>,
    /// Worker threads for trial fan-out
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct InitEvalArgs {
    /// Comma-separated initializer names (default: all)
    #[arg(long)]
    init: Option<String>,
    #[command(flatten)]
    source: SourceArgs,
    /// Output prefix for a CSV copy of the table
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct DatasetInfoArgs {
    /// Dataset container path (.tmds)
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct MakeSyntheticArgs {
    /// Synthetic spec: n=..,m=..,seed=..[,snr=..]
    #[arg(long)]
    synthetic: Option<String>,
    /// Grayscale PGM whose pixels become the ground-truth signal
    #[arg(long)]
    image: Option<PathBuf>,
    /// Output prefix; writes PREFIX.tmds
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };
    let result = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Benchmark(args) => cmd_benchmark(args),
        Command::InitEval(args) => cmd_init_eval(args),
        Command::DatasetInfo(args) => cmd_dataset_info(args),
        Command::MakeSynthetic(args) => cmd_make_synthetic(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

struct ResolvedSource {
    instance: Instance<f64>,
    seed: u64,
    echo: String,
}

fn resolve_source(source: &SourceArgs, cfg: &ConfigMap) -> Result<ResolvedSource, CliError> {
    let synthetic = match &source.synthetic {
        Some(raw) => Some(raw.clone()),
        None => cfg.get("synthetic").map(|s| s.to_string()),
    };
    let dataset = match &source.dataset {
        Some(p) => Some(p.clone()),
        None => cfg.get("dataset").map(PathBuf::from),
    };
    match (synthetic, dataset) {
        (Some(_), Some(_)) => Err(CliError::Usage(
            "exactly one instance source allowed: --synthetic or --dataset".into(),
        )),
        (None, None) => Err(CliError::Usage(
            "an instance source is required: --synthetic n=..,m=..,seed=.. or --dataset PATH".into(),
        )),
        (Some(raw), None) => {
            let spec = SyntheticSpec::parse(&raw)?;
            let n = spec
                .n
                .ok_or_else(|| CliError::Usage("--synthetic requires n=..".into()))?;
            let m = spec
                .m
                .ok_or_else(|| CliError::Usage("--synthetic requires m=..".into()))?;
            let seed = resolve_seed(spec.seed, cfg)?;
            let mut gspec = GaussianSpec::new(n, m, seed);
            if let Some(v) = spec.variance {
                gspec = gspec.with_variance(v);
            }
            gspec.snr_db = spec.snr_db;
            let instance = make_gaussian_instance::<f64>(&gspec, None)?;
            Ok(ResolvedSource {
                instance,
                seed,
                echo: format!("source=synthetic:{}", spec.echo(seed)),
            })
        }
        (None, Some(path)) => {
            let instance = load_tm::<f64>(&path)?;
            let seed = resolve_seed(None, cfg)?;
            Ok(ResolvedSource {
                instance,
                seed,
                echo: format!("source=dataset:{}", path.display()),
            })
        }
    }
}

fn resolve_seed(explicit: Option<u64>, cfg: &ConfigMap) -> Result<u64, CliError> {
    if let Some(seed) = explicit {
        return Ok(seed);
    }
    if let Some(raw) = cfg.get("seed") {
        return raw
            .parse::<u64>()
            .map_err(|_| CliError::Usage(format!("config key seed: cannot parse {raw:?}")));
    }
    Ok(env_seed()?.unwrap_or(0))
}

fn resolve_solver_options(
    solver: &SolverOptArgs,
    cfg: &ConfigMap,
    seed: u64,
) -> Result<SolveOptions<f64>, CliError> {
    let defaults = SolveOptions::<f64>::default();
    Ok(SolveOptions {
        tol: cfg.resolve(solver.tol, "tol", defaults.tol)?,
        max_iters: cfg.resolve(solver.max_iters, "max-iters", defaults.max_iters)?,
        window_w: cfg.resolve(solver.window, "window", defaults.window_w)?,
        seed,
        ..defaults
    })
}

fn resolve_init_spec(name: &str) -> Result<InitSpec<f64>, CliError> {
    InitSpec::from_name(name).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown initializer {name:?}; valid names: {}",
            INIT_NAMES.join(", ")
        ))
    })
}

fn resolve_algorithm(name: &str) -> Result<Algorithm, CliError> {
    Algorithm::from_name(name).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown algorithm {name:?}; valid names: {}",
            Algorithm::valid_names()
        ))
    })
}

fn run_initializer(
    spec: &InitSpec<f64>,
    inst: &Instance<f64>,
    seed: u64,
) -> Result<InitResult<f64>, CliError> {
    let eig_opts = EigOptions::default().with_seed(seed);
    Ok(spec.resolve(inst, &eig_opts)?)
}

fn alignment(direction: &[Complex<f64>], x_true: &[Complex<f64>]) -> f64 {
    linalg::dot(direction, x_true).norm() / (linalg::norm(direction) * linalg::norm(x_true))
}

fn cmd_solve(args: SolveArgs) -> Result<(), CliError> {
    let cfg = ConfigMap::load(args.config.as_deref())?;
    let alg_name = cfg.resolve(args.alg.clone(), "alg", "gs".to_string())?;
    let init_name = cfg.resolve(args.init.clone(), "init", "spectral-optimal".to_string())?;
    let algorithm = resolve_algorithm(&alg_name)?;
    let init_spec = resolve_init_spec(&init_name)?;
    let source = resolve_source(&args.source, &cfg)?;
    let opts = resolve_solver_options(&args.solver, &cfg, source.seed)?;
    let out = cfg.resolve_opt(args.out.clone(), "out")?;

    println!(
        "# phaserepo solve alg={alg_name} init={init_name} {} tol={:e} max_iters={} window={} seed={}",
        source.echo, opts.tol, opts.max_iters, opts.window_w, source.seed
    );

    let inst = &source.instance;
    let started = Instant::now();
    let init = run_initializer(&init_spec, inst, source.seed)?;
    let result = algorithm.solve(inst, &init, &opts)?;
    let wall = started.elapsed().as_secs_f64();

    let meas_err = rel_measurement_error(inst, &result.x_hat)?;
    println!("algorithm: {}", result.meta.algorithm);
    println!("status: {}", result.trace.status.as_str());
    println!("iterations: {}", result.trace.iterations);
    println!("wall_time_s: {wall:.6}");
    println!("rel_measurement_error: {meas_err:e}");
    if let Some(x_true) = &inst.x_true {
        let phase_err = phase_aligned_error(x_true, &result.x_hat)?;
        println!("phase_aligned_error: {phase_err:e}");
    }
    println!("init: {}", result.meta.init);

    if let Some(prefix) = out {
        let mut trace_csv =
            String::from("iteration,objective,grad_norm,stepsize,backtracks,elapsed_s\n");
        for r in &result.trace.records {
            trace_csv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.iteration, r.objective, r.grad_norm, r.stepsize, r.backtracks, r.elapsed_s
            ));
        }
        write_atomic(Path::new(&format!("{prefix}.trace.csv")), trace_csv.as_bytes())?;

        let mut xhat_csv = String::from("re,im\n");
        for z in &result.x_hat {
            xhat_csv.push_str(&format!("{},{}\n", z.re, z.im));
        }
        write_atomic(Path::new(&format!("{prefix}.xhat.csv")), xhat_csv.as_bytes())?;
        println!("wrote: {prefix}.trace.csv {prefix}.xhat.csv");
    }
    Ok(())
}

fn plot_script(prefix: &str, axis: &str, algorithms: &[String]) -> String {
    let stem = Path::new(prefix)
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| prefix.to_string());
    format!(
        "# phaserepo benchmark plot (gnuplot)\n\
         set datafile separator ','\n\
         set key outside\n\
         set logscale y\n\
         set xlabel '{axis}'\n\
         set ylabel 'median phase-aligned error'\n\
         set grid\n\
         algs = \"{}\"\n\
         plot for [alg in algs] '{stem}.summary.csv' \\\n\
         \x20   using 2:(strcol(1) eq alg ? column(4) : NaN) \\\n\
         \x20   with linespoints title alg\n",
        algorithms.join(" ")
    )
}

fn cmd_benchmark(args: BenchmarkArgs) -> Result<(), CliError> {
    let cfg = ConfigMap::load(args.config.as_deref())?;
    let alg_list = cfg.resolve(args.alg.clone(), "alg", "gs,fienup,af,wf".to_string())?;
    let init_name = cfg.resolve(args.init.clone(), "init", "spectral-optimal".to_string())?;
    let axis_name = cfg.resolve(args.axis.clone(), "axis", "ratio".to_string())?;
    let values_raw = cfg.resolve(args.values.clone(), "values", "2,4,6,8".to_string())?;
    let trials = cfg.resolve(args.trials, "trials", 10usize)?;
    let jobs = cfg.resolve(args.jobs, "jobs", 1usize)?;
    let prefix = cfg.resolve(args.out.clone(), "out", "benchmark".to_string())?;

    let axis = BenchmarkAxis::from_name(&axis_name).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown axis {axis_name:?}; valid: ratio, snr, iterations, time"
        ))
    })?;
    let axis_values: Vec<f64> = values_raw
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("--values: cannot parse {v:?}")))
        })
        .collect::<Result<_, _>>()?;

    let algorithms: Vec<Algorithm> = alg_list
        .split(',')
        .map(|name| resolve_algorithm(name.trim()))
        .collect::<Result<_, _>>()?;
    let init_spec = resolve_init_spec(&init_name)?;

    let synthetic_raw = args
        .source
        .synthetic
        .clone()
        .or_else(|| cfg.get("synthetic").map(|s| s.to_string()))
        .ok_or_else(|| {
            CliError::Usage("benchmark requires --synthetic n=..[,m=..][,seed=..]".into())
        })?;
    if args.source.dataset.is_some() {
        return Err(CliError::Usage(
            "benchmark sweeps generate instances; --dataset is not supported here".into(),
        ));
    }
    let spec = SyntheticSpec::parse(&synthetic_raw)?;
    let n = spec
        .n
        .ok_or_else(|| CliError::Usage("--synthetic requires n=..".into()))?;
    let seed_base = resolve_seed(spec.seed, &cfg)?;
    let opts = resolve_solver_options(&args.solver, &cfg, seed_base)?;

    let mut grid = BenchmarkGrid::<f64>::new(axis, axis_values, n);
    grid.trials = trials;
    grid.seed_base = seed_base;
    grid.snr_db = spec.snr_db;
    if let Some(m) = spec.m {
        grid.ratio = m as f64 / n as f64;
    }
    grid.initializer = init_spec;
    grid.algorithms = algorithms.iter().map(|&a| (a, opts.clone())).collect();

    println!(
        "# phaserepo benchmark alg={alg_list} init={init_name} axis={} values={values_raw} trials={trials} n={n} ratio={} seed={seed_base} jobs={jobs}",
        axis.name(),
        grid.ratio
    );

    let records = run_benchmark(&grid, jobs)?;
    let summary = summarize(&records)?;

    let alg_names: Vec<String> = algorithms.iter().map(|a| a.name().to_string()).collect();
    write_atomic(
        Path::new(&format!("{prefix}.records.csv")),
        records_to_csv(&records).as_bytes(),
    )?;
    write_atomic(
        Path::new(&format!("{prefix}.summary.csv")),
        summary_to_csv(&summary).as_bytes(),
    )?;
    write_atomic(
        Path::new(&format!("{prefix}.plot.gp")),
        plot_script(&prefix, axis.name(), &alg_names).as_bytes(),
    )?;
    println!("wrote: {prefix}.records.csv {prefix}.summary.csv {prefix}.plot.gp");

    for row in &summary {
        println!(
            "{} @ {}: median_phase_err={:e} success_rate={:.2}",
            row.algorithm, row.axis_value, row.median_phase_err, row.success_rate
        );
    }

    let succeeded = records.iter().filter(|r| r.status != "error").count();
    if succeeded == 0 {
        return Err(CliError::Numeric("every benchmark run failed".into()));
    }
    Ok(())
}

fn cmd_init_eval(args: InitEvalArgs) -> Result<(), CliError> {
    let cfg = ConfigMap::load(args.config.as_deref())?;
    let init_list = cfg.resolve(args.init.clone(), "init", INIT_NAMES.join(","))?;
    let out = cfg.resolve_opt(args.out.clone(), "out")?;
    let source = resolve_source(&args.source, &cfg)?;
    let inst = &source.instance;

    let x_true = inst.x_true.clone().ok_or_else(|| {
        CliError::Usage(
            "init-eval requires ground truth; use a synthetic source or a dataset that stores x_true"
                .into(),
        )
    })?;

    println!(
        "# phaserepo init-eval init={init_list} {} seed={}",
        source.echo, source.seed
    );

    let specs: Vec<InitSpec<f64>> = init_list
        .split(',')
        .map(|name| resolve_init_spec(name.trim()))
        .collect::<Result<_, _>>()?;

    let mut csv = String::from("initializer,alignment,alpha,eig_value\n");
    println!(
        "{:<20} {:>10} {:>12} {:>12}  diagnostics",
        "initializer", "alignment", "alpha", "eig_value"
    );
    for spec in &specs {
        let init = run_initializer(spec, inst, source.seed)?;
        let align = alignment(&init.raw_direction, &x_true);
        println!(
            "{:<20} {:>10.4} {:>12.5e} {:>12.5e}  {}",
            spec.name(),
            align,
            init.alpha,
            init.eig_value,
            init.diagnostics
        );
        csv.push_str(&format!(
            "{},{},{},{}\n",
            spec.name(),
            align,
            init.alpha,
            init.eig_value
        ));
    }

    if let Some(prefix) = out {
        write_atomic(Path::new(&format!("{prefix}.init.csv")), csv.as_bytes())?;
        println!("wrote: {prefix}.init.csv");
    }
    Ok(())
}

fn cmd_dataset_info(args: DatasetInfoArgs) -> Result<(), CliError> {
    let cfg = ConfigMap::load(args.config.as_deref())?;
    let path = args
        .dataset
        .or_else(|| cfg.get("dataset").map(PathBuf::from))
        .ok_or_else(|| CliError::Usage("dataset-info requires --dataset PATH".into()))?;

    let ds = phaserepo_core::datasets::load_tm_dataset(&path).map_err(CoreError::from)?;
    println!("# phaserepo dataset-info source=dataset:{}", path.display());
    println!("path: {}", path.display());
    println!("m: {}", ds.m);
    println!("n: {}", ds.n);
    println!(
        "matrix: {}",
        if ds.is_complex() { "complex" } else { "real" }
    );
    println!("ground_truth: {}", ds.x_true.is_some());
    let (mut min, mut max, mut sum) = (f32::INFINITY, 0.0f32, 0.0f64);
    for &v in &ds.b {
        min = min.min(v);
        max = max.max(v);
        sum += v as f64;
    }
    println!(
        "b: min={min:e} mean={:e} max={max:e}",
        sum / ds.b.len().max(1) as f64
    );
    Ok(())
}

fn cmd_make_synthetic(args: MakeSyntheticArgs) -> Result<(), CliError> {
    let cfg = ConfigMap::load(args.config.as_deref())?;
    let prefix = cfg.resolve(args.out.clone(), "out", "synthetic".to_string())?;
    let synthetic_raw = args
        .synthetic
        .clone()
        .or_else(|| cfg.get("synthetic").map(|s| s.to_string()))
        .unwrap_or_default();
    let spec = SyntheticSpec::parse(&synthetic_raw)?;
    let image = args
        .image
        .clone()
        .or_else(|| cfg.get("image").map(PathBuf::from));

    let x_true: Option<Vec<Complex<f64>>> = match &image {
        Some(path) => {
            let (signal, w, h) = load_image_signal::<f64>(path).map_err(CoreError::from)?;
            if let Some(n) = spec.n {
                if n != w * h {
                    return Err(CliError::Usage(format!(
                        "--synthetic n={n} conflicts with image size {w}x{h} = {}",
                        w * h
                    )));
                }
            }
            Some(signal.into_iter().map(|v| Complex::new(v, 0.0)).collect())
        }
        None => None,
    };

    let n = match (&x_true, spec.n) {
        (Some(x), _) => x.len(),
        (None, Some(n)) => n,
        (None, None) => {
            return Err(CliError::Usage(
                "make-synthetic requires --synthetic n=..,m=.. or --image PATH".into(),
            ))
        }
    };
    let m = spec
        .m
        .ok_or_else(|| CliError::Usage("make-synthetic requires m=..".into()))?;
    let seed = resolve_seed(spec.seed, &cfg)?;

    let mut gspec = GaussianSpec::new(n, m, seed);
    if let Some(v) = spec.variance {
        gspec = gspec.with_variance(v);
    }
    gspec.snr_db = spec.snr_db;

    println!(
        "# phaserepo make-synthetic source=synthetic:{}{} out={prefix}.tmds",
        spec.echo(seed),
        image
            .as_ref()
            .map(|p| format!(" image={}", p.display()))
            .unwrap_or_default()
    );

    let inst = make_gaussian_instance::<f64>(&gspec, x_true)?;
    let ds = TmDataset::from_instance(&inst)?;
    // Serialize in memory first so the file write is all-or-nothing.
    let bytes = ds.to_bytes().map_err(CoreError::from)?;
    let path = format!("{prefix}.tmds");
    write_atomic(Path::new(&path), &bytes)?;
    println!("wrote: {path} (m={m}, n={n}, complex=true, ground_truth=true)");
    Ok(())
}
