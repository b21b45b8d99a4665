//! Accuracy experiments: MAE versus collocation count and versus Gaussian
//! parameter noise, over repeated random trials with boxplot statistics.
//!
//! Every trial is seed-indexed, so a sweep is deterministic for a given
//! master seed regardless of how trials are ordered or interleaved.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::pauli::Preset;
use crate::sim::{
    default_initial_state, derive_seed, generate_dataset, omega0, perturb_couplings,
    sample_couplings, CouplingMatrix,
};
use crate::train::{fit, TrainConfig};
use crate::{Error, Result};

/// Configuration for one sweep run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepConfig {
    pub preset: Preset,
    /// Collocation counts to sweep (collocation sweep).
    pub n_list: Vec<usize>,
    /// Noise levels to sweep (noise sweep), as fractions of ω₀.
    pub sigma_list: Vec<f64>,
    /// Fixed collocation count for the noise sweep.
    pub fixed_n: usize,
    /// Fixed noise level for the collocation sweep (0 = noiseless).
    pub fixed_sigma: f64,
    pub trials: usize,
    pub t_final: f64,
    pub master_seed: u64,
    pub train: TrainConfig,
}

impl SweepConfig {
    pub fn new(preset: Preset, master_seed: u64) -> Self {
        let train = TrainConfig {
            preset,
            seed: 0,
            ..TrainConfig::default()
        };
        Self {
            preset,
            n_list: vec![2, 5, 10, 20, 50],
            sigma_list: vec![0.001, 0.01, 0.05, 0.1],
            fixed_n: 20,
            fixed_sigma: 0.0,
            trials: 50,
            t_final: 1.0,
            master_seed,
            train,
        }
    }
}

/// Five-number summary with 1.5·IQR outlier detection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxplotStats {
    /// Lowest value that is not an outlier.
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    /// Highest value that is not an outlier.
    pub max: f64,
    pub outliers: Vec<f64>,
    pub count: usize,
}

/// Quantile by linear interpolation of order statistics (inclusive method):
/// rank h = (n−1)p, interpolated between floor(h) and ceil(h).
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Boxplot statistics of a nonempty list of finite values.
pub fn boxplot_stats(values: &[f64]) -> Result<BoxplotStats> {
    if values.is_empty() {
        return Err(Error::EmptyInput("boxplot of empty sample".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidConfig("non-finite value in sample".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let q1 = quantile(&sorted, 0.25);
    let median = quantile(&sorted, 0.5);
    let q3 = quantile(&sorted, 0.75);
    let iqr = q3 - q1;
    let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let outliers: Vec<f64> = sorted
        .iter()
        .copied()
        .filter(|&v| v < lo_fence || v > hi_fence)
        .collect();
    let inliers: Vec<f64> = sorted
        .iter()
        .copied()
        .filter(|&v| (lo_fence..=hi_fence).contains(&v))
        .collect();
    // Whiskers sit at the extreme non-outliers, but never inside the box:
    // when interpolation places a quartile between the last inlier and an
    // outlier, the whisker collapses onto the box edge.
    Ok(BoxplotStats {
        min: inliers[0].min(q1),
        max: inliers.last().expect("the median inliers are never outliers").max(q3),
        q1,
        median,
        q3,
        outliers,
        count: sorted.len(),
    })
}

/// One trial's outcome in a sweep.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrialRecord {
    pub sweep_value: f64,
    pub trial: usize,
    /// Absent when the trial's optimization failed.
    pub mae: Option<f64>,
    pub converged: bool,
}

/// All trials at one sweep value.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepPoint {
    pub sweep_value: f64,
    pub records: Vec<TrialRecord>,
    /// Stats over the successful trials; absent when all failed.
    pub stats: Option<BoxplotStats>,
    pub failures: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepReport {
    pub config: SweepConfig,
    /// "collocation" or "noise".
    pub kind: String,
    pub points: Vec<SweepPoint>,
}

/// Sample couplings, redrawing any active entry with |J| < 0.05·ω₀ so the
/// relative-error MAE stays well defined.
pub fn sample_couplings_resampled(seed: u64, t_final: f64, preset: Preset) -> CouplingMatrix {
    let floor = 0.05 * omega0(t_final);
    let mut j = sample_couplings(seed, t_final, preset);
    let mut attempt = 1u64;
    while preset
        .active_indices()
        .iter()
        .any(|idx| j.get(idx.k, idx.l).abs() < floor)
    {
        let fresh = sample_couplings(derive_seed(seed, &[0x7265, attempt]), t_final, preset);
        for idx in preset.active_indices() {
            if j.get(idx.k, idx.l).abs() < floor {
                j.set(idx.k, idx.l, fresh.get(idx.k, idx.l)).expect("active");
            }
        }
        attempt += 1;
    }
    j
}

fn run_trial(
    config: &SweepConfig,
    point_index: usize,
    trial: usize,
    n: usize,
    sigma: f64,
    sweep_value: f64,
) -> TrialRecord {
    let trial_seed = derive_seed(config.master_seed, &[point_index as u64, trial as u64]);
    let j0 = sample_couplings_resampled(derive_seed(trial_seed, &[1]), config.t_final, config.preset);
    let generating = match perturb_couplings(
        &j0,
        config.preset,
        sigma,
        config.t_final,
        derive_seed(trial_seed, &[2]),
    ) {
        Ok(j) => j,
        Err(_) => {
            return TrialRecord {
                sweep_value,
                trial,
                mae: None,
                converged: false,
            }
        }
    };
    let dataset = generate_dataset(&generating, &default_initial_state(), n, config.t_final);
    let mut dataset = match dataset {
        Ok(d) => d,
        Err(_) => {
            return TrialRecord {
                sweep_value,
                trial,
                mae: None,
                converged: false,
            }
        }
    };
    // The prediction target is the unperturbed J⁰.
    dataset.metadata.true_couplings = Some(j0);
    dataset.metadata.sigma = Some(sigma);
    dataset.metadata.preset = Some(config.preset);
    dataset.metadata.seed = Some(trial_seed);

    let mut train = config.train.clone();
    train.preset = config.preset;
    train.seed = derive_seed(trial_seed, &[3]);
    match fit(&dataset, &train) {
        Ok(result) => TrialRecord {
            sweep_value,
            trial,
            mae: result.mae,
            converged: result.converged,
        },
        Err(_) => TrialRecord {
            sweep_value,
            trial,
            mae: None,
            converged: false,
        },
    }
}

fn collect_point(records: Vec<TrialRecord>, sweep_value: f64) -> SweepPoint {
    let maes: Vec<f64> = records.iter().filter_map(|r| r.mae).collect();
    let failures = records.len() - maes.len();
    let stats = if maes.is_empty() {
        None
    } else {
        Some(boxplot_stats(&maes).expect("nonempty and finite"))
    };
    SweepPoint {
        sweep_value,
        records,
        stats,
        failures,
    }
}

/// MAE versus number of collocation points at fixed noise.
pub fn run_collocation_sweep(config: &SweepConfig) -> Result<SweepReport> {
    if config.n_list.is_empty() || config.trials == 0 {
        return Err(Error::InvalidConfig("empty sweep".into()));
    }
    let mut points = Vec::new();
    for (pi, &n) in config.n_list.iter().enumerate() {
        let records: Vec<TrialRecord> = (0..config.trials)
            .map(|trial| run_trial(config, pi, trial, n, config.fixed_sigma, n as f64))
            .collect();
        points.push(collect_point(records, n as f64));
    }
    Ok(SweepReport {
        config: config.clone(),
        kind: "collocation".into(),
        points,
    })
}

/// MAE versus Gaussian noise level at fixed collocation count.
pub fn run_noise_sweep(config: &SweepConfig) -> Result<SweepReport> {
    if config.sigma_list.is_empty() || config.trials == 0 {
        return Err(Error::InvalidConfig("empty sweep".into()));
    }
    if config.sigma_list.iter().any(|&s| s < 0.0) {
        return Err(Error::NegativeSigma(
            *config
                .sigma_list
                .iter()
                .find(|&&s| s < 0.0)
                .expect("checked"),
        ));
    }
    let mut points = Vec::new();
    for (pi, &sigma) in config.sigma_list.iter().enumerate() {
        let records: Vec<TrialRecord> = (0..config.trials)
            .map(|trial| run_trial(config, pi, trial, config.fixed_n, sigma, sigma))
            .collect();
        points.push(collect_point(records, sigma));
    }
    Ok(SweepReport {
        config: config.clone(),
        kind: "noise".into(),
        points,
    })
}

/// Raw per-trial CSV: every MAE value, so external tools can recompute the
/// stats exactly.
pub fn raw_csv(report: &SweepReport) -> String {
    let mut out = String::from("sweep_value,trial,mae,converged\n");
    for point in &report.points {
        for r in &point.records {
            let mae = r.mae.map(|m| m.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{}", r.sweep_value, r.trial, mae, r.converged);
        }
    }
    out
}

/// Human-readable report: config echo, per-point stats, failure counts.
pub fn text_report(report: &SweepReport) -> String {
    let mut out = String::new();
    let c = &report.config;
    let _ = writeln!(out, "sweep kind: {}", report.kind);
    let _ = writeln!(out, "preset: {}", c.preset.name());
    let _ = writeln!(out, "trials per point: {}", c.trials);
    let _ = writeln!(out, "t_final: {}", c.t_final);
    let _ = writeln!(out, "master seed: {}", c.master_seed);
    match report.kind.as_str() {
        "collocation" => {
            let _ = writeln!(out, "fixed sigma: {}", c.fixed_sigma);
            let _ = writeln!(out, "n list: {:?}", c.n_list);
        }
        _ => {
            let _ = writeln!(out, "fixed n: {}", c.fixed_n);
            let _ = writeln!(out, "sigma list: {:?}", c.sigma_list);
        }
    }
    let _ = writeln!(
        out,
        "training: hidden {:?}, M={}, iters={}, restarts={}",
        c.train.hidden, c.train.residual_points, c.train.iterations, c.train.restarts
    );
    let _ = writeln!(out);
    for p in &report.points {
        match &p.stats {
            Some(s) => {
                let _ = writeln!(
                    out,
                    "value {:>8}: median {:.4e}  q1 {:.4e}  q3 {:.4e}  min {:.4e}  max {:.4e}  outliers {}  failures {}",
                    p.sweep_value, s.median, s.q1, s.q3, s.min, s.max, s.outliers.len(), p.failures
                );
            }
            None => {
                let _ = writeln!(
                    out,
                    "value {:>8}: all {} trials failed",
                    p.sweep_value, p.failures
                );
            }
        }
    }
    out
}

/// Write `raw.csv`, `report.txt` and `report.json` into a directory.
pub fn write_report(report: &SweepReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.display().to_string(),
        source: e,
    })?;
    let write = |name: &str, contents: String| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, contents).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })
    };
    write("raw.csv", raw_csv(report))?;
    write("report.txt", text_report(report))?;
    write("report.json", serde_json::to_string_pretty(report)?)?;
    Ok(())
}

/// Parse a raw MAE CSV (as produced by [`raw_csv`]) back into
/// (sweep value, MAE) samples grouped by sweep value, preserving order.
pub fn read_raw_csv<R: std::io::Read>(r: R) -> Result<Vec<(f64, Vec<f64>)>> {
    use std::io::BufRead;
    let reader = std::io::BufReader::new(r);
    let mut groups: Vec<(f64, Vec<f64>)> = Vec::new();
    for (line_no, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse {
            line: line_no + 1,
            message: e.to_string(),
        })?;
        if line_no == 0 || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::Parse {
                line: line_no + 1,
                message: format!("expected 4 fields, found {}", fields.len()),
            });
        }
        let value: f64 = fields[0].parse().map_err(|_| Error::Parse {
            line: line_no + 1,
            message: format!("bad sweep value {:?}", fields[0]),
        })?;
        if fields[2].is_empty() {
            continue; // failed trial
        }
        let mae: f64 = fields[2].parse().map_err(|_| Error::Parse {
            line: line_no + 1,
            message: format!("bad mae {:?}", fields[2]),
        })?;
        match groups.last_mut() {
            Some((v, maes)) if *v == value => maes.push(mae),
            _ => groups.push((value, vec![mae])),
        }
    }
    Ok(groups)
}
