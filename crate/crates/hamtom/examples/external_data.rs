//! The external-data path: write a dataset to the CSV exchange format, read
//! it back (as a measured tomography file would arrive), and fit it.
//!
//! The same code path ingests real expectation-value tables: a `t` column
//! followed by the 15 Pauli observables, with optional `# key = value`
//! metadata comments.

use hamtom::experiments::sample_couplings_resampled;
use hamtom::io::{read_dataset, write_dataset};
use hamtom::pauli::Preset;
use hamtom::sim::{default_initial_state, generate_dataset};
use hamtom::train::{fit, TrainConfig};

fn main() {
    let dir = std::env::temp_dir();
    let path = dir.join("hamtom_example_dataset.csv");

    let preset = Preset::HXYZ;
    let j = sample_couplings_resampled(3, 1.0, preset);
    let mut dataset = generate_dataset(&j, &default_initial_state(), 5, 1.0).unwrap();
    dataset.metadata.true_couplings = Some(j);
    dataset.metadata.preset = Some(preset);
    write_dataset(&dataset, &path).unwrap();
    println!("wrote {}", path.display());

    let loaded = read_dataset(&path).unwrap();
    println!(
        "read back {} rows, preset {:?}, first line of data: t={} XX={:+.5}",
        loaded.len(),
        loaded.metadata.preset.map(|p| p.name()),
        loaded.times()[0],
        loaded.values()[0][4]
    );

    let config = TrainConfig {
        preset,
        seed: 9,
        ..TrainConfig::default()
    };
    let result = fit(&loaded, &config).unwrap();
    println!(
        "fit from file: loss {:.2e}, MAE {:.4}%",
        result.loss_total,
        result.mae.unwrap() * 100.0
    );

    std::fs::remove_file(&path).ok();
}
