//! Multi-algorithm sweep harness: runs every algorithm on bit-identical
//! instances and initializer outputs per grid cell, and serializes records
//! to CSV deterministically.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use crate::eigensolve::EigOptions;
use crate::error::{Error, Result};
use crate::gradient::SolveOptions;
use crate::initializers::InitSpec;
use crate::metrics::{phase_aligned_error, rel_measurement_error};
use crate::operators::{make_gaussian_instance, GaussianSpec, Instance};
use crate::scalar::Real;
use crate::solvers::Algorithm;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BenchmarkAxis {
    SamplingRatio,
    SnrDb,
    Iterations,
    TimeBudget,
}

impl BenchmarkAxis {
    pub fn name(&self) -> &'static str {
        match self {
            BenchmarkAxis::SamplingRatio => "sampling_ratio",
            BenchmarkAxis::SnrDb => "snr_db",
            BenchmarkAxis::Iterations => "iterations",
            BenchmarkAxis::TimeBudget => "time_budget",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "sampling_ratio" | "ratio" => Some(BenchmarkAxis::SamplingRatio),
            "snr_db" | "snr" => Some(BenchmarkAxis::SnrDb),
            "iterations" | "iters" => Some(BenchmarkAxis::Iterations),
            "time_budget" | "time" => Some(BenchmarkAxis::TimeBudget),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchmarkGrid<T: Real> {
    pub axis: BenchmarkAxis,
    /// Strictly increasing axis values.
    pub axis_values: Vec<f64>,
    pub n: usize,
    /// Sampling ratio m/n used on axes other than the sampling ratio.
    pub ratio: f64,
    /// Noise level applied on axes other than the SNR axis; None = noiseless.
    pub snr_db: Option<f64>,
    pub trials: usize,
    pub seed_base: u64,
    pub algorithms: Vec<(Algorithm, SolveOptions<T>)>,
    pub initializer: InitSpec<T>,
}

impl<T: Real> BenchmarkGrid<T> {
    pub fn new(axis: BenchmarkAxis, axis_values: Vec<f64>, n: usize) -> Self {
        Self {
            axis,
            axis_values,
            n,
            ratio: 8.0,
            snr_db: None,
            trials: 1,
            seed_base: 0,
            algorithms: Vec::new(),
            initializer: InitSpec::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.axis_values.is_empty() {
            return Err(Error::InvalidArgument("axis_values is empty".into()));
        }
        if !self.axis_values.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument(
                "axis_values must be strictly increasing".into(),
            ));
        }
        if self.trials < 1 {
            return Err(Error::InvalidArgument("trials must be >= 1".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidArgument("no algorithms selected".into()));
        }
        if self.n < 1 {
            return Err(Error::InvalidArgument("n must be >= 1".into()));
        }
        Ok(())
    }
}

/// One (algorithm, axis point, trial) result row.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkRecord {
    pub algorithm: String,
    pub axis: String,
    pub axis_value: f64,
    pub trial: usize,
    pub seed: u64,
    pub phase_err: f64,
    pub meas_err: f64,
    pub iters: usize,
    pub time_s: f64,
    pub status: String,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Deterministic per-cell seed; stable across platforms and runs.
pub fn cell_seed(seed_base: u64, axis_value: f64, trial: usize) -> u64 {
    seed_base ^ splitmix64(axis_value.to_bits() ^ splitmix64(trial as u64))
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

struct Cell {
    axis_value: f64,
    trial: usize,
}

/// Runs the full sweep. Within one cell every algorithm sees the same
/// instance and the same initializer output. `jobs` only controls the worker
/// count; output records are identical for any value.
pub fn run_benchmark<T: Real>(grid: &BenchmarkGrid<T>, jobs: usize) -> Result<Vec<BenchmarkRecord>> {
    grid.validate()?;
    let jobs = jobs.max(1);

    let cells: Vec<Cell> = grid
        .axis_values
        .iter()
        .flat_map(|&axis_value| {
            (0..grid.trials).map(move |trial| Cell { axis_value, trial })
        })
        .collect();

    let results: Mutex<Vec<Option<Vec<BenchmarkRecord>>>> =
        Mutex::new((0..cells.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let first_error: Mutex<Option<Error>> = Mutex::new(None);

    std::thread::scope(|scope| {
        for _ in 0..jobs.min(cells.len().max(1)) {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::SeqCst);
                if idx >= cells.len() {
                    break;
                }
                match run_cell(grid, &cells[idx]) {
                    Ok(records) => {
                        results.lock().unwrap()[idx] = Some(records);
                    }
                    Err(e) => {
                        let mut slot = first_error.lock().unwrap();
                        if slot.is_none() {
                            *slot = Some(e);
                        }
                        results.lock().unwrap()[idx] = Some(Vec::new());
                    }
                }
            });
        }
    });

    if let Some(e) = first_error.into_inner().unwrap() {
        return Err(e);
    }

    let mut records: Vec<BenchmarkRecord> = results
        .into_inner()
        .unwrap()
        .into_iter()
        .flat_map(|r| r.unwrap_or_default())
        .collect();
    // Deterministic merge order regardless of worker scheduling.
    records.sort_by(|a, b| {
        (a.algorithm.as_str(), a.axis_value, a.trial)
            .partial_cmp(&(b.algorithm.as_str(), b.axis_value, b.trial))
            .unwrap()
    });
    Ok(records)
}

fn run_cell<T: Real>(grid: &BenchmarkGrid<T>, cell: &Cell) -> Result<Vec<BenchmarkRecord>> {
    let seed = cell_seed(grid.seed_base, cell.axis_value, cell.trial);

    let (m, snr_db) = match grid.axis {
        BenchmarkAxis::SamplingRatio => (
            (cell.axis_value * grid.n as f64).round() as usize,
            grid.snr_db,
        ),
        BenchmarkAxis::SnrDb => (
            (grid.ratio * grid.n as f64).round() as usize,
            Some(cell.axis_value),
        ),
        _ => ((grid.ratio * grid.n as f64).round() as usize, grid.snr_db),
    };
    let mut spec = GaussianSpec::new(grid.n, m.max(1), seed);
    spec.snr_db = snr_db;
    let inst: Instance<T> = make_gaussian_instance(&spec, None)?;

    let eig_opts = EigOptions::default().with_seed(splitmix64(seed));
    let init = grid.initializer.resolve(&inst, &eig_opts);

    let mut records = Vec::with_capacity(grid.algorithms.len());
    for (alg, base_opts) in &grid.algorithms {
        let mut opts = base_opts.clone();
        opts.seed = seed ^ fnv1a(alg.name().as_bytes());
        match grid.axis {
            BenchmarkAxis::Iterations => opts.max_iters = cell.axis_value.round() as usize,
            BenchmarkAxis::TimeBudget => opts.time_budget = Some(cell.axis_value),
            _ => {}
        }

        let started = Instant::now();
        let outcome = match &init {
            Ok(init) => alg.solve(&inst, init, &opts).map(|r| (r, false)),
            Err(e) => Err(Error::InvalidArgument(format!("initializer failed: {e}"))),
        };
        let time_s = started.elapsed().as_secs_f64();

        let record = match outcome {
            Ok((result, _)) => {
                let phase_err = inst
                    .x_true
                    .as_ref()
                    .map(|xt| phase_aligned_error(xt, &result.x_hat))
                    .transpose()?
                    .map(|v| v.to_f64_lossy())
                    .unwrap_or(f64::NAN);
                let meas_err = rel_measurement_error(&inst, &result.x_hat)
                    .map(|v| v.to_f64_lossy())
                    .unwrap_or(1.0);
                BenchmarkRecord {
                    algorithm: alg.name().into(),
                    axis: grid.axis.name().into(),
                    axis_value: cell.axis_value,
                    trial: cell.trial,
                    seed,
                    phase_err,
                    meas_err,
                    iters: result.trace.iterations,
                    time_s,
                    status: result.trace.status.as_str().into(),
                }
            }
            Err(_) => {
                // Failed runs become error rows scored at the initializer
                // point (or unit error when even that is unavailable).
                BenchmarkRecord {
                    algorithm: alg.name().into(),
                    axis: grid.axis.name().into(),
                    axis_value: cell.axis_value,
                    trial: cell.trial,
                    seed,
                    phase_err: 1.0,
                    meas_err: 1.0,
                    iters: 0,
                    time_s,
                    status: "error".into(),
                }
            }
        };
        records.push(record);
    }
    Ok(records)
}

/// Per-(algorithm, axis value) aggregates.
#[derive(Clone, Debug)]
pub struct SummaryRow {
    pub algorithm: String,
    pub axis_value: f64,
    pub count: usize,
    pub median_phase_err: f64,
    pub mean_phase_err: f64,
    pub median_meas_err: f64,
    pub mean_meas_err: f64,
    /// Fraction of trials with phase_err below the success threshold.
    pub success_rate: f64,
}

/// Phase-aligned error below this counts as an exact recovery.
pub const SUCCESS_THRESHOLD: f64 = 1e-5;

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

pub fn summarize(records: &[BenchmarkRecord]) -> Result<Vec<SummaryRow>> {
    if records.is_empty() {
        return Err(Error::InvalidArgument(
            "summarize requires at least one record".into(),
        ));
    }
    let mut keys: Vec<(String, f64)> = records
        .iter()
        .map(|r| (r.algorithm.clone(), r.axis_value))
        .collect();
    keys.sort_by(|a, b| a.partial_cmp(b).unwrap());
    keys.dedup_by(|a, b| a == b);

    let mut rows = Vec::with_capacity(keys.len());
    for (alg, axis_value) in keys {
        let group: Vec<&BenchmarkRecord> = records
            .iter()
            .filter(|r| r.algorithm == alg && r.axis_value == axis_value)
            .collect();
        let mut phase: Vec<f64> = group.iter().map(|r| r.phase_err).collect();
        let mut meas: Vec<f64> = group.iter().map(|r| r.meas_err).collect();
        phase.sort_by(|a, b| a.partial_cmp(b).unwrap());
        meas.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let count = group.len();
        let successes = phase.iter().filter(|&&e| e <= SUCCESS_THRESHOLD).count();
        rows.push(SummaryRow {
            algorithm: alg,
            axis_value,
            count,
            median_phase_err: median(&phase),
            mean_phase_err: phase.iter().sum::<f64>() / count as f64,
            median_meas_err: median(&meas),
            mean_meas_err: meas.iter().sum::<f64>() / count as f64,
            success_rate: successes as f64 / count as f64,
        });
    }
    Ok(rows)
}

/// Serializes records with the stable header; floats print as shortest
/// round-trip decimals, lines end with LF.
pub fn records_to_csv(records: &[BenchmarkRecord]) -> String {
    let mut out =
        String::from("algorithm,axis,axis_value,trial,seed,phase_err,meas_err,iters,time_s,status\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.algorithm,
            r.axis,
            r.axis_value,
            r.trial,
            r.seed,
            r.phase_err,
            r.meas_err,
            r.iters,
            r.time_s,
            r.status
        ));
    }
    out
}

pub fn summary_to_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(
        "algorithm,axis_value,count,median_phase_err,mean_phase_err,median_meas_err,mean_meas_err,success_rate\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.algorithm,
            r.axis_value,
            r.count,
            r.median_phase_err,
            r.mean_phase_err,
            r.median_meas_err,
            r.mean_meas_err,
            r.success_rate
        ));
    }
    out
}
