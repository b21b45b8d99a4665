//! Command-line interface over the library: dataset generation, fitting,
//! sweeps, and boxplot statistics.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hamtom::experiments::{
    boxplot_stats, read_raw_csv, run_collocation_sweep, run_noise_sweep, write_report, SweepConfig,
};
use hamtom::io;
use hamtom::pauli::Preset;
use hamtom::sim::{
    default_initial_state, derive_seed, generate_dataset, perturb_couplings, DatasetSource,
};
use hamtom::train::{fit, TrainConfig};

#[derive(Parser)]
#[command(name = "hamtom", about = "Two-qubit Hamiltonian tomography via inverse PINN")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct TrainOpts {
    /// Hidden layer widths, comma separated.
    #[arg(long, value_delimiter = ',')]
    hidden: Option<Vec<usize>>,
    /// Residual-grid size M.
    #[arg(long)]
    residual_points: Option<usize>,
    /// Optimizer iteration budget per restart.
    #[arg(long)]
    iters: Option<usize>,
    /// Number of restarts.
    #[arg(long)]
    restarts: Option<usize>,
}

impl TrainOpts {
    fn apply(&self, config: &mut TrainConfig) {
        if let Some(h) = &self.hidden {
            config.hidden = h.clone();
        }
        if let Some(m) = self.residual_points {
            config.residual_points = m;
        }
        if let Some(i) = self.iters {
            config.iterations = i;
        }
        if let Some(r) = self.restarts {
            config.restarts = r;
        }
    }
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    Preset::from_name(s).map_err(|e| e.to_string())
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset CSV from randomly sampled couplings.
    GenData {
        #[arg(long, value_parser = parse_preset)]
        preset: Preset,
        /// Number of collocation points.
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        t_final: f64,
        /// Gaussian parameter-noise fraction of ω₀.
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit couplings to a dataset CSV; writes a JSON fit report.
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_parser = parse_preset)]
        preset: Preset,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        train: TrainOpts,
    },
    /// MAE vs number of collocation points over repeated random trials.
    SweepCollocation {
        #[arg(long, value_parser = parse_preset)]
        preset: Preset,
        #[arg(long, value_delimiter = ',')]
        n_list: Vec<usize>,
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 1.0)]
        t_final: f64,
        #[arg(long)]
        seed: u64,
        /// Output directory (raw.csv, report.txt, report.json).
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        train: TrainOpts,
    },
    /// MAE vs Gaussian noise level at fixed collocation count.
    SweepNoise {
        #[arg(long, value_parser = parse_preset)]
        preset: Preset,
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, value_delimiter = ',')]
        sigma_list: Vec<f64>,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 1.0)]
        t_final: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        train: TrainOpts,
    },
    /// Recompute boxplot statistics from a raw MAE CSV.
    Stats {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn run() -> hamtom::Result<()> {
    match Cli::parse().command {
        Command::GenData {
            preset,
            n,
            t_final,
            sigma,
            seed,
            out,
        } => {
            let j0 = hamtom::experiments::sample_couplings_resampled(
                derive_seed(seed, &[1]),
                t_final,
                preset,
            );
            let generating =
                perturb_couplings(&j0, preset, sigma, t_final, derive_seed(seed, &[2]))?;
            let mut dataset = generate_dataset(&generating, &default_initial_state(), n, t_final)?;
            dataset.metadata.source = DatasetSource::Synthetic;
            dataset.metadata.true_couplings = Some(j0);
            dataset.metadata.sigma = Some(sigma);
            dataset.metadata.seed = Some(seed);
            dataset.metadata.preset = Some(preset);
            io::write_dataset(&dataset, &out)?;
            eprintln!("wrote {} collocation points to {}", n, out.display());
        }
        Command::Fit {
            data,
            preset,
            seed,
            out,
            train,
        } => {
            let dataset = io::read_dataset(&data)?;
            let mut config = TrainConfig {
                preset,
                seed,
                ..TrainConfig::default()
            };
            train.apply(&mut config);
            let result = fit(&dataset, &config)?;
            std::fs::write(&out, serde_json::to_string_pretty(&result)?).map_err(|e| {
                hamtom::Error::Io {
                    path: out.display().to_string(),
                    source: e,
                }
            })?;
            match result.mae {
                Some(mae) => eprintln!(
                    "fit done: loss {:.3e}, MAE {:.3}%, report {}",
                    result.loss_total,
                    mae * 100.0,
                    out.display()
                ),
                None => eprintln!(
                    "fit done: loss {:.3e}, report {}",
                    result.loss_total,
                    out.display()
                ),
            }
        }
        Command::SweepCollocation {
            preset,
            n_list,
            sigma,
            trials,
            t_final,
            seed,
            out,
            train,
        } => {
            let mut config = SweepConfig::new(preset, seed);
            config.n_list = n_list;
            config.fixed_sigma = sigma;
            config.trials = trials;
            config.t_final = t_final;
            train.apply(&mut config.train);
            let report = run_collocation_sweep(&config)?;
            write_report(&report, &out)?;
            print!("{}", hamtom::experiments::text_report(&report));
        }
        Command::SweepNoise {
            preset,
            n,
            sigma_list,
            trials,
            t_final,
            seed,
            out,
            train,
        } => {
            let mut config = SweepConfig::new(preset, seed);
            config.sigma_list = sigma_list;
            config.fixed_n = n;
            config.trials = trials;
            config.t_final = t_final;
            train.apply(&mut config.train);
            let report = run_noise_sweep(&config)?;
            write_report(&report, &out)?;
            print!("{}", hamtom::experiments::text_report(&report));
        }
        Command::Stats { input } => {
            let file = std::fs::File::open(&input).map_err(|e| hamtom::Error::Io {
                path: input.display().to_string(),
                source: e,
            })?;
            for (value, maes) in read_raw_csv(file)? {
                let s = boxplot_stats(&maes)?;
                println!(
                    "value {:>8}: n {}  median {:.4e}  q1 {:.4e}  q3 {:.4e}  min {:.4e}  max {:.4e}  outliers {}",
                    value, s.count, s.median, s.q1, s.q3, s.min, s.max, s.outliers.len()
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
