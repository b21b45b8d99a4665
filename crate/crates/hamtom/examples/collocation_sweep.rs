//! Reduced-scale accuracy-vs-data-budget sweep: median MAE over repeated
//! random trials as the number of collocation points grows.
//!
//! Five trials per point keep this to a few minutes; the CLI
//! (`hamtom sweep-collocation`) runs the same machinery at full scale.

use hamtom::experiments::{run_collocation_sweep, text_report, SweepConfig};
use hamtom::pauli::Preset;

fn main() {
    let mut config = SweepConfig::new(Preset::HZ, 2024);
    config.n_list = vec![3, 5, 10];
    config.trials = 5;
    let report = run_collocation_sweep(&config).unwrap();
    print!("{}", text_report(&report));
}
