//! Tour of the two-qubit Pauli algebra layer: commutator expansions, the
//! ODE generator, and the decoupled blocks each Hamiltonian preset induces.

use hamtom::pauli::{commutator_expansion, decoupled_blocks, generator, PauliIndex, Preset};
use hamtom::sim::CouplingMatrix;

fn main() {
    // A couple of commutators, written out in the observable basis.
    for (a, b) in [((3, 0), (1, 0)), ((1, 1), (2, 2)), ((0, 3), (3, 3))] {
        let pa = PauliIndex::new(a.0, a.1).unwrap();
        let pb = PauliIndex::new(b.0, b.1).unwrap();
        let expansion = commutator_expansion(pa, pb);
        let terms: Vec<String> = expansion
            .terms
            .iter()
            .map(|(idx, c)| format!("{c:+} {}", idx.label()))
            .collect();
        println!(
            "i[{}, {}] = {}",
            pa.label(),
            pb.label(),
            if terms.is_empty() { "0".into() } else { terms.join(" ") }
        );
    }

    // The generator A(J) of dv/dt = A v for a single nonzero coupling.
    let mut j = CouplingMatrix::zero();
    j.set(3, 0, 1.0).unwrap(); // sigma_z (x) identity
    let a = generator(&j);
    println!("\nnonzero entries of A for J_30 = 1:");
    for row in 0..15 {
        for col in 0..15 {
            if a[(row, col)] != 0.0 {
                println!("  A[{row:2},{col:2}] = {:+}", a[(row, col)]);
            }
        }
    }

    // Which observables talk to which, per preset.
    for preset in [Preset::HZ, Preset::HXYZ, Preset::General] {
        let blocks = decoupled_blocks(preset);
        println!("\npreset {:8} splits into {} block(s):", preset.name(), blocks.len());
        for block in blocks {
            let labels: Vec<String> = block.iter().map(|i| i.label()).collect();
            println!("  {{{}}}", labels.join(", "));
        }
    }
}
