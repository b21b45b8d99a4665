//! Quick accuracy/runtime probe over the main fit scenarios.

use std::time::Instant;

use hamtom::experiments::{run_collocation_sweep, run_noise_sweep, SweepConfig};
use hamtom::pauli::Preset;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let trials: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(5);
    let iters: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(0);

    let scenario = |preset: Preset, n: usize, sigma: f64, label: &str| {
        let mut c = SweepConfig::new(preset, 1234);
        c.trials = trials;
        if iters > 0 {
            c.train.iterations = iters;
        }
        let t0 = Instant::now();
        let report = if sigma == 0.0 {
            c.n_list = vec![n];
            run_collocation_sweep(&c).unwrap()
        } else {
            c.fixed_n = n;
            c.sigma_list = vec![sigma];
            run_noise_sweep(&c).unwrap()
        };
        let p = &report.points[0];
        let med = p.stats.as_ref().map(|s| s.median).unwrap_or(f64::NAN);
        let max = p.stats.as_ref().map(|s| s.max).unwrap_or(f64::NAN);
        println!(
            "{label:30} median MAE {:.4}%  max(non-outlier) {:.4}%  failures {}  [{:.1}s total, {:.1}s/trial]",
            med * 100.0,
            max * 100.0,
            p.failures,
            t0.elapsed().as_secs_f64(),
            t0.elapsed().as_secs_f64() / trials as f64
        );
    };

    scenario(Preset::HZ, 5, 0.0, "HZ      N=5  sigma=0");
    scenario(Preset::HXYZ, 5, 0.0, "HXYZ    N=5  sigma=0");
    scenario(Preset::General, 20, 0.0, "GENERAL N=20 sigma=0");
    scenario(Preset::General, 5, 0.0, "GENERAL N=5  sigma=0");
    scenario(Preset::General, 20, 0.01, "GENERAL N=20 sigma=1%");
    scenario(Preset::HZ, 5, 0.1, "HZ      N=5  sigma=10%");
}
