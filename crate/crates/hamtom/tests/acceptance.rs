//! Acceptance gate: every release-blocking property of the toolkit, run
//! sequentially with one PASS/FAIL line per criterion.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines as
//! they complete. The full gate takes roughly half an hour on one core; the
//! recovery criteria (5-8) dominate.

use std::process::Command;
use std::time::Instant;

use nalgebra::{Matrix4, SVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hamtom::experiments::{
    run_collocation_sweep, run_noise_sweep, sample_couplings_resampled, SweepConfig, SweepReport,
};
use hamtom::nn::NetworkModel;
use hamtom::pauli::{self, PauliIndex, Preset};
use hamtom::sim::{
    default_initial_state, evolve_density, evolve_exact, generate_dataset, observable_vector,
    CouplingMatrix, DensityMatrix,
};
use hamtom::train::{fit, LossWorkspace, TrainConfig};

struct Gate {
    failures: Vec<String>,
}

impl Gate {
    fn report(&mut self, number: u32, name: &str, pass: bool, detail: String) {
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!("[{verdict}] criterion {number:2} {name}: {detail}");
        if !pass {
            self.failures.push(format!("criterion {number} ({name}): {detail}"));
        }
    }
}

fn random_coupling(rng: &mut impl Rng, scale: f64) -> CouplingMatrix {
    let mut j = CouplingMatrix::zero();
    for k in 0..4 {
        for l in 0..4 {
            if (k, l) != (0, 0) {
                j.set(k, l, rng.gen_range(-scale..scale)).unwrap();
            }
        }
    }
    j
}

fn random_pure_state(rng: &mut impl Rng) -> DensityMatrix {
    let psi = SVector::<Complex64, 4>::from_fn(|_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    DensityMatrix::pure(&psi)
}

/// 1. Structure constants reproduce `i[P_a, P_b]` computed by direct 4x4
///    matrix arithmetic, for all 225 basis pairs.
fn criterion_1(gate: &mut Gate) {
    let t0 = Instant::now();
    let basis: Vec<PauliIndex> = pauli::OBSERVABLE_BASIS.to_vec();
    let mut worst = 0.0_f64;
    for &a in &basis {
        for &b in &basis {
            let pa = pauli::pauli_string(a);
            let pb = pauli::pauli_string(b);
            let direct = (pa * pb - pb * pa) * Complex64::i();
            let mut rebuilt = Matrix4::<Complex64>::zeros();
            for (target, coeff) in pauli::commutator_expansion(a, b).terms {
                rebuilt += pauli::pauli_string(target) * Complex64::new(coeff, 0.0);
            }
            worst = worst.max((direct - rebuilt).norm());
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    let pass = worst <= 1e-12 && secs < 1.0;
    gate.report(
        1,
        "commutator table vs matrix oracle",
        pass,
        format!("max deviation {worst:.2e} (<= 1e-12), {secs:.2}s (< 1s)"),
    );
}

/// 2+3. Observable-vector evolution exp(A t) v0 against density-matrix
///      evolution U rho U^dagger for random couplings and pure states, plus
///      norm conservation along the way.
fn criteria_2_3(gate: &mut Gate) {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let times: Vec<f64> = (0..10).map(|i| 0.05 + 0.95 * i as f64 / 9.0).collect();
    let mut worst_gap = 0.0_f64;
    let mut worst_drift = 0.0_f64;
    for _ in 0..100 {
        let j = random_coupling(&mut rng, 4.0);
        let rho0 = random_pure_state(&mut rng);
        let v0 = observable_vector(&rho0);
        let norm0 = v0.norm();
        let evolved = evolve_exact(&j, &v0, &times).unwrap();
        for (&t, v) in times.iter().zip(&evolved) {
            let reference = observable_vector(&evolve_density(&j, &rho0, t));
            worst_gap = worst_gap.max((v - reference).amax());
            worst_drift = worst_drift.max((v.norm() - norm0).abs());
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    let pass2 = worst_gap <= 1e-9 && secs < 10.0;
    gate.report(
        2,
        "vector vs density evolution",
        pass2,
        format!("max componentwise gap {worst_gap:.2e} (<= 1e-9), {secs:.2}s (< 10s)"),
    );
    let pass3 = worst_drift < 1e-10;
    gate.report(
        3,
        "observable-vector norm conservation",
        pass3,
        format!("max norm drift {worst_drift:.2e} (< 1e-10)"),
    );
}

/// 4. Forward-mode time derivatives and the full composed-loss gradient
///    against central finite differences, 50 random configurations each.
fn criterion_4(gate: &mut Gate) {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(40);

    // Time-derivative check.
    let mut worst_dt = 0.0_f64;
    for _ in 0..50 {
        let widths: &[usize] = [&[6_usize][..], &[8, 5], &[4, 4, 4]][rng.gen_range(0..3)];
        let mut model = NetworkModel::init(widths, rng.gen()).unwrap();
        let mut params = Vec::new();
        model.flatten_into(&mut params);
        for p in params.iter_mut() {
            // Randomize everything (the final layer starts at zero) so the
            // derivative is nontrivial.
            *p += rng.gen_range(-0.7..0.7);
        }
        model.unflatten_from(&params);
        let t: f64 = rng.gen_range(0.0..1.0);
        let h = 1e-5;
        let (_, ad) = model.forward_with_time_derivative(t);
        let fd = (model.forward(t + h) - model.forward(t - h)) / (2.0 * h);
        let rel = (&fd - &ad).amax() / (ad.amax() + 1e-8);
        worst_dt = worst_dt.max(rel);
    }

    // Full-loss gradient check: spot-check a strided subset of coordinates
    // (all couplings included) per configuration.
    let mut worst_grad = 0.0_f64;
    for case in 0..50u64 {
        let j = sample_couplings_resampled(400 + case, 1.0, Preset::General);
        let ds = generate_dataset(&j, &default_initial_state(), 4, 1.0).unwrap();
        let mut config = TrainConfig {
            preset: Preset::General,
            residual_points: 7,
            hidden: vec![6, 5],
            ..TrainConfig::default()
        };
        config.lambda_data = rng.gen_range(0.5..10.0);
        config.lambda_model = rng.gen_range(0.5..2.0);
        let workspace = LossWorkspace::new(&ds, &config);

        let mut model = NetworkModel::init(&config.hidden, 4000 + case).unwrap();
        let mut net_params = Vec::new();
        model.flatten_into(&mut net_params);
        for p in net_params.iter_mut() {
            *p += rng.gen_range(-0.6..0.6);
        }
        model.unflatten_from(&net_params);
        let j_active: Vec<f64> = (0..15).map(|_| rng.gen_range(-2.0..2.0)).collect();

        let (_, _, _, net_grad, j_grad) = workspace.loss_and_gradient(&model, &j_active, &config);
        let mut flat = Vec::new();
        net_grad.flatten_into(&mut flat);
        flat.extend(&j_grad);

        let eval = |net: &[f64], ja: &[f64], model: &mut NetworkModel| {
            model.unflatten_from(net);
            let (_, _, total, _, _) = workspace.loss_and_gradient(model, ja, &config);
            total
        };

        let h = 1e-5;
        let n_net = net_params.len();
        for i in (0..n_net + 15).step_by(9) {
            let fd = if i < n_net {
                let orig = net_params[i];
                net_params[i] = orig + h;
                let lp = eval(&net_params, &j_active, &mut model);
                net_params[i] = orig - h;
                let lm = eval(&net_params, &j_active, &mut model);
                net_params[i] = orig;
                model.unflatten_from(&net_params);
                (lp - lm) / (2.0 * h)
            } else {
                let mut ja = j_active.clone();
                let orig = ja[i - n_net];
                ja[i - n_net] = orig + h;
                let lp = eval(&net_params, &ja, &mut model);
                ja[i - n_net] = orig - h;
                let lm = eval(&net_params, &ja, &mut model);
                (lp - lm) / (2.0 * h)
            };
            let rel = (flat[i] - fd).abs() / (flat[i].abs() + 1e-8);
            worst_grad = worst_grad.max(rel);
        }
    }

    let secs = t0.elapsed().as_secs_f64();
    let pass = worst_dt < 1e-6 && worst_grad < 1e-5 && secs < 30.0;
    gate.report(
        4,
        "autodiff vs finite differences",
        pass,
        format!(
            "time-derivative rel {worst_dt:.2e} (< 1e-6), loss-gradient rel {worst_grad:.2e} (< 1e-5), {secs:.1}s (< 30s)"
        ),
    );
}

fn median_of(report: &SweepReport, point: usize) -> Option<f64> {
    report.points[point].stats.as_ref().map(|s| s.median)
}

/// 5. Noiseless restricted-Hamiltonian recovery: median MAE < 1% at N=5 for
///    both the Z-coupled and XYZ-coupled presets.
fn criterion_5(gate: &mut Gate) {
    let t0 = Instant::now();
    let mut medians = Vec::new();
    for preset in [Preset::HZ, Preset::HXYZ] {
        let mut c = SweepConfig::new(preset, 501);
        c.n_list = vec![5];
        c.trials = 20;
        let report = run_collocation_sweep(&c).unwrap();
        medians.push((preset.name(), median_of(&report, 0)));
    }
    let secs = t0.elapsed().as_secs_f64();
    let pass = medians.iter().all(|(_, m)| m.is_some_and(|m| m < 0.01)) && secs < 600.0;
    let shown: Vec<String> = medians
        .iter()
        .map(|(name, m)| match m {
            Some(m) => format!("{name} {:.3}%", m * 100.0),
            None => format!("{name} no stats"),
        })
        .collect();
    gate.report(
        5,
        "noiseless z/xyz recovery, N=5 x20 trials",
        pass,
        format!("median MAE {} (< 1%), {secs:.0}s (< 600s)", shown.join(", ")),
    );
}

/// 6. Noiseless full-coupling recovery: median MAE < 2% at N=20, and N=5 is
///    qualitatively insufficient (its median exceeds the N=20 one).
fn criterion_6(gate: &mut Gate) {
    let t0 = Instant::now();
    let mut c = SweepConfig::new(Preset::General, 601);
    c.n_list = vec![5, 20];
    c.trials = 10;
    let report = run_collocation_sweep(&c).unwrap();
    let m5 = median_of(&report, 0);
    let m20 = median_of(&report, 1);
    let secs = t0.elapsed().as_secs_f64();
    let pass = match (m5, m20) {
        (Some(m5), Some(m20)) => m20 < 0.02 && m5 > m20 && secs < 900.0,
        _ => false,
    };
    gate.report(
        6,
        "noiseless general recovery, x10 trials",
        pass,
        format!(
            "median MAE N=20 {:.3}% (< 2%), N=5 {:.1}% (must exceed N=20), {secs:.0}s (< 900s)",
            m20.unwrap_or(f64::NAN) * 100.0,
            m5.unwrap_or(f64::NAN) * 100.0
        ),
    );
}

/// 7. Noisy full-coupling recovery: median MAE < 5% at N=20 with 1% Gaussian
///    parameter noise.
fn criterion_7(gate: &mut Gate) {
    let t0 = Instant::now();
    let mut c = SweepConfig::new(Preset::General, 701);
    c.fixed_n = 20;
    c.sigma_list = vec![0.01];
    c.trials = 10;
    let report = run_noise_sweep(&c).unwrap();
    let median = median_of(&report, 0);
    let secs = t0.elapsed().as_secs_f64();
    let pass = median.is_some_and(|m| m < 0.05) && secs < 900.0;
    gate.report(
        7,
        "noisy general recovery, sigma=1% x10 trials",
        pass,
        format!(
            "median MAE {:.2}% (< 5%), {secs:.0}s (< 900s)",
            median.unwrap_or(f64::NAN) * 100.0
        ),
    );
}

/// 8. Heavy noise breaks small-N recovery: sigma=10% at N=5 must leave the
///    median MAE above 10%.
fn criterion_8(gate: &mut Gate) {
    let t0 = Instant::now();
    let mut c = SweepConfig::new(Preset::HZ, 801);
    c.fixed_n = 5;
    c.sigma_list = vec![0.1];
    c.trials = 10;
    let report = run_noise_sweep(&c).unwrap();
    let median = median_of(&report, 0);
    let secs = t0.elapsed().as_secs_f64();
    let pass = median.is_some_and(|m| m > 0.10);
    gate.report(
        8,
        "sigma=10% degradation, z preset N=5",
        pass,
        format!(
            "median MAE {:.1}% (> 10%), {secs:.0}s",
            median.unwrap_or(f64::NAN) * 100.0
        ),
    );
}

/// 9. The external-data path is lossless end to end: fitting a dataset that
///    went through CSV serialization gives bit-identical results to fitting
///    the in-memory original.
fn criterion_9(gate: &mut Gate) {
    let j = sample_couplings_resampled(901, 1.0, Preset::HZ);
    let mut ds = generate_dataset(&j, &default_initial_state(), 5, 1.0).unwrap();
    ds.metadata.true_couplings = Some(j);
    ds.metadata.preset = Some(Preset::HZ);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("roundtrip.csv");
    hamtom::io::write_dataset(&ds, &path).unwrap();
    let loaded = hamtom::io::read_dataset(&path).unwrap();

    let config = TrainConfig {
        preset: Preset::HZ,
        iterations: 1500,
        restarts: 1,
        seed: 902,
        ..TrainConfig::default()
    };
    let direct = fit(&ds, &config).unwrap();
    let via_csv = fit(&loaded, &config).unwrap();

    let same_j = direct
        .predicted
        .as_array()
        .iter()
        .flatten()
        .zip(via_csv.predicted.as_array().iter().flatten())
        .all(|(a, b)| a.to_bits() == b.to_bits());
    let same_mae = match (direct.mae, via_csv.mae) {
        (Some(a), Some(b)) => a.to_bits() == b.to_bits(),
        (None, None) => true,
        _ => false,
    };
    gate.report(
        9,
        "csv round trip reproduces the fit bit-for-bit",
        same_j && same_mae,
        format!("couplings identical: {same_j}, MAE identical: {same_mae}"),
    );
}

/// 10. CLI determinism: the same invocation with the same seed writes
///     byte-identical outputs.
fn criterion_10(gate: &mut Gate) {
    let exe = env!("CARGO_BIN_EXE_hamtom");
    let dir = tempfile::tempdir().unwrap();

    let run = |args: &[&str]| {
        let out = Command::new(exe).args(args).output().unwrap();
        assert!(
            out.status.success(),
            "hamtom {args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    };

    let mut identical = true;
    let mut detail = Vec::new();

    for (tag, n) in [("a", "5"), ("b", "7")] {
        let p1 = dir.path().join(format!("gen-{tag}-1.csv"));
        let p2 = dir.path().join(format!("gen-{tag}-2.csv"));
        for p in [&p1, &p2] {
            run(&[
                "gen-data", "--preset", "z", "--n", n, "--sigma", "0.02", "--seed", "11",
                "--out", p.to_str().unwrap(),
            ]);
        }
        let same = std::fs::read(&p1).unwrap() == std::fs::read(&p2).unwrap();
        identical &= same;
        detail.push(format!("gen-data(n={n}) {same}"));
    }

    for rep in ["sweep1", "sweep2"] {
        let out = dir.path().join(rep);
        run(&[
            "sweep-collocation", "--preset", "z", "--n-list", "3,5", "--trials", "2",
            "--seed", "12", "--iters", "300", "--restarts", "1", "--hidden", "8",
            "--out", out.to_str().unwrap(),
        ]);
    }
    let same_sweep = std::fs::read(dir.path().join("sweep1/raw.csv")).unwrap()
        == std::fs::read(dir.path().join("sweep2/raw.csv")).unwrap();
    identical &= same_sweep;
    detail.push(format!("sweep raw.csv {same_sweep}"));

    let data = dir.path().join("gen-a-1.csv");
    for rep in ["fit1.json", "fit2.json"] {
        run(&[
            "fit", "--data", data.to_str().unwrap(), "--preset", "z", "--seed", "13",
            "--iters", "300", "--restarts", "1", "--hidden", "8",
            "--out", dir.path().join(rep).to_str().unwrap(),
        ]);
    }
    let same_fit = std::fs::read(dir.path().join("fit1.json")).unwrap()
        == std::fs::read(dir.path().join("fit2.json")).unwrap();
    // The fit report embeds a wall-clock field, so compare everything else.
    let same_fit = same_fit || {
        let strip = |p: &str| {
            let text = std::fs::read_to_string(dir.path().join(p)).unwrap();
            text.lines()
                .filter(|l| !l.contains("wall_time_secs"))
                .collect::<Vec<_>>()
                .join("\n")
        };
        strip("fit1.json") == strip("fit2.json")
    };
    identical &= same_fit;
    detail.push(format!("fit report (modulo wall time) {same_fit}"));

    gate.report(
        10,
        "cli determinism under fixed seeds",
        identical,
        detail.join(", "),
    );
}

#[test]
fn acceptance_gate() {
    let mut gate = Gate { failures: Vec::new() };
    criterion_1(&mut gate);
    criteria_2_3(&mut gate);
    criterion_4(&mut gate);
    criterion_5(&mut gate);
    criterion_6(&mut gate);
    criterion_7(&mut gate);
    criterion_8(&mut gate);
    criterion_9(&mut gate);
    criterion_10(&mut gate);
    assert!(
        gate.failures.is_empty(),
        "acceptance failures:\n{}",
        gate.failures.join("\n")
    );
}
