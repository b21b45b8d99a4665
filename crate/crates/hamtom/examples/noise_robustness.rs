//! Reduced-scale robustness sweep: how the recovery error grows with the
//! Gaussian perturbation applied to the generating couplings.
//!
//! The MAE is always measured against the unperturbed couplings, so it mixes
//! the fit error with the injected parameter noise — exactly the quantity an
//! experimenter sees when the lab Hamiltonian drifts from its nominal value.

use hamtom::experiments::{run_noise_sweep, text_report, SweepConfig};
use hamtom::pauli::Preset;

fn main() {
    let mut config = SweepConfig::new(Preset::HZ, 7);
    config.fixed_n = 5;
    config.sigma_list = vec![0.0, 0.01, 0.05, 0.1];
    config.trials = 5;
    let report = run_noise_sweep(&config).unwrap();
    print!("{}", text_report(&report));
}
