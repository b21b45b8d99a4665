//! End-to-end parameter recovery: sample couplings, tabulate five observable
//! snapshots, and recover the couplings with the inverse-PINN fit.
//!
//! Takes ~10s on one core. Pass a preset name (z, xyz, general) to try the
//! other Hamiltonian families; `general` benefits from more data points.

use hamtom::experiments::sample_couplings_resampled;
use hamtom::pauli::Preset;
use hamtom::sim::{default_initial_state, generate_dataset};
use hamtom::train::{fit, TrainConfig};

fn main() {
    let preset = std::env::args()
        .nth(1)
        .map(|s| Preset::from_name(&s).expect("preset: z, xyz, or general"))
        .unwrap_or(Preset::HZ);
    let n = if preset == Preset::General { 20 } else { 5 };

    let t_final = 1.0;
    let j = sample_couplings_resampled(42, t_final, preset);
    let dataset = generate_dataset(&j, &default_initial_state(), n, t_final).unwrap();
    let mut dataset = dataset;
    dataset.metadata.true_couplings = Some(j);
    dataset.metadata.preset = Some(preset);

    let config = TrainConfig {
        preset,
        seed: 1,
        ..TrainConfig::default()
    };
    println!("fitting preset {:?} from {n} collocation points...", preset.name());
    let result = fit(&dataset, &config).unwrap();

    println!(
        "\ndone in {:.1}s (winning restart {}, converged {})",
        result.wall_time_secs, result.winning_restart, result.converged
    );
    println!("loss: model {:.2e}, data {:.2e}", result.loss_model, result.loss_data);
    println!("\n  param    exact      fitted     rel err");
    for e in result.per_parameter.as_ref().unwrap() {
        println!(
            "  J_{}   {:+.5}   {:+.5}   {:.3}%",
            e.label,
            e.exact,
            e.predicted,
            e.relative_error * 100.0
        );
    }
    println!("\nMAE {:.4}%", result.mae.unwrap() * 100.0);
}
