//! Property tests over randomized inputs.

use hamtom::experiments::boxplot_stats;
use hamtom::io::{read_dataset_from, write_dataset_to};
use hamtom::pauli::{self, PauliIndex, DIM};
use hamtom::sim::{CouplingMatrix, DatasetMetadata, ObservableVector, TrajectoryDataset};
use proptest::prelude::*;

fn coupling_strategy() -> impl Strategy<Value = CouplingMatrix> {
    prop::collection::vec(-10.0_f64..10.0, 15).prop_map(|vals| {
        let mut j = CouplingMatrix::zero();
        let mut it = vals.into_iter();
        for k in 0..4 {
            for l in 0..4 {
                if (k, l) != (0, 0) {
                    j.set(k, l, it.next().unwrap()).unwrap();
                }
            }
        }
        j
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generator_stays_antisymmetric(j in coupling_strategy()) {
        let a = pauli::generator(&j);
        prop_assert!((a + a.transpose()).amax() <= 1e-12);
    }

    #[test]
    fn generator_row_count_excludes_identity(j in coupling_strategy()) {
        // The dynamics is closed on the 15 traceless observables; every
        // commutator term lands inside the basis.
        for k in 0..4usize {
            for l in 0..4usize {
                if (k, l) == (0, 0) { continue; }
                let idx = PauliIndex::new(k, l).unwrap();
                for (target, _) in pauli::commutator_expansion(idx, idx).terms {
                    prop_assert_ne!((target.k, target.l), (0, 0));
                }
            }
        }
        prop_assert_eq!(pauli::generator(&j).nrows(), DIM);
    }

    #[test]
    fn dataset_roundtrip_identity(
        times in prop::collection::vec(0.0_f64..100.0, 2..20),
        raw in prop::collection::vec(-1.0_f64..1.0, 20 * DIM),
    ) {
        let mut times = times;
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        times.dedup();
        prop_assume!(times.len() >= 2);
        let values: Vec<ObservableVector> = (0..times.len())
            .map(|i| ObservableVector::from_fn(|m, _| raw[(i * DIM + m) % raw.len()]))
            .collect();
        let ds = TrajectoryDataset::try_new(times, values, DatasetMetadata::external()).unwrap();
        let mut buf = Vec::new();
        write_dataset_to(&ds, &mut buf).unwrap();
        let back = read_dataset_from(&buf[..]).unwrap();
        prop_assert_eq!(ds.times(), back.times());
        prop_assert_eq!(ds.values(), back.values());
    }

    #[test]
    fn boxplot_invariants(values in prop::collection::vec(0.0_f64..1e3, 1..100)) {
        let s = boxplot_stats(&values).unwrap();
        prop_assert!(s.min <= s.q1 && s.q1 <= s.median && s.median <= s.q3 && s.q3 <= s.max);
        let iqr = s.q3 - s.q1;
        for o in &s.outliers {
            prop_assert!(*o < s.q1 - 1.5 * iqr || *o > s.q3 + 1.5 * iqr);
        }
        prop_assert_eq!(s.count, values.len());
        // whiskers are real data points, except when they collapse onto a
        // box edge because no inlier lies beyond the quartile
        prop_assert!(values.contains(&s.min) || s.min == s.q1);
        prop_assert!(values.contains(&s.max) || s.max == s.q3);
    }
}
