//! Exact algebra of two-qubit Pauli strings.
//!
//! The 15 traceless Pauli strings `σ_k ⊗ σ_l` (all index pairs except
//! identity⊗identity) form a basis in which the Heisenberg equation becomes a
//! linear ODE `dv/dt = A(J) v` for the vector of expectation values. This
//! module builds the structure constants of that algebra by direct 4×4 matrix
//! commutators and assembles the generator `A(J)`.

use nalgebra::{Matrix2, Matrix4, SMatrix};
use num_complex::Complex64;
use once_cell::sync::Lazy;

use crate::sim::CouplingMatrix;
use crate::{Error, Result};

/// Number of traceless two-qubit Pauli observables.
pub const DIM: usize = 15;

/// Index pair (k, l) of a Pauli string `σ_k ⊗ σ_l`, each in 0..=3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliIndex {
    pub k: usize,
    pub l: usize,
}

impl PauliIndex {
    pub fn new(k: usize, l: usize) -> Result<Self> {
        if k > 3 {
            return Err(Error::PauliIndexOutOfRange(k));
        }
        if l > 3 {
            return Err(Error::PauliIndexOutOfRange(l));
        }
        Ok(Self { k, l })
    }

    /// Position in [`OBSERVABLE_BASIS`], or `None` for the identity (0,0).
    pub fn basis_position(&self) -> Option<usize> {
        if self.k == 0 && self.l == 0 {
            None
        } else {
            // Lexicographic over (k,l) with (0,0) removed.
            Some(self.k * 4 + self.l - 1)
        }
    }

    /// Two-letter label, e.g. (1,3) → "XZ", (0,2) → "IY".
    pub fn label(&self) -> String {
        const LETTERS: [char; 4] = ['I', 'X', 'Y', 'Z'];
        format!("{}{}", LETTERS[self.k], LETTERS[self.l])
    }
}

/// The 15 observable index pairs in lexicographic order:
/// (0,1), (0,2), (0,3), (1,0), (1,1), ..., (3,3).
pub static OBSERVABLE_BASIS: Lazy<[PauliIndex; DIM]> = Lazy::new(|| {
    let mut out = [PauliIndex { k: 0, l: 1 }; DIM];
    let mut pos = 0;
    for k in 0..4 {
        for l in 0..4 {
            if k == 0 && l == 0 {
                continue;
            }
            out[pos] = PauliIndex { k, l };
            pos += 1;
        }
    }
    out
});

/// Single-qubit Pauli matrix: identity for 0, X/Y/Z for 1/2/3.
pub fn pauli_matrix(k: usize) -> Result<Matrix2<Complex64>> {
    let o = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    match k {
        0 => Ok(Matrix2::new(one, o, o, one)),
        1 => Ok(Matrix2::new(o, one, one, o)),
        2 => Ok(Matrix2::new(o, -i, i, o)),
        3 => Ok(Matrix2::new(one, o, o, -one)),
        _ => Err(Error::PauliIndexOutOfRange(k)),
    }
}

/// The 4×4 matrix of the Pauli string `σ_k ⊗ σ_l`.
pub fn pauli_string(idx: PauliIndex) -> Matrix4<Complex64> {
    let a = pauli_matrix(idx.k).expect("validated index");
    let b = pauli_matrix(idx.l).expect("validated index");
    let m = a.kronecker(&b);
    Matrix4::from_iterator(m.iter().copied())
}

/// Expansion of `i·[σ_a⊗σ_b, σ_c⊗σ_d]` over the observable basis.
///
/// The factor `i` is absorbed so every coefficient is real; the identity
/// never appears because commutators are traceless.
#[derive(Clone, Debug, PartialEq)]
pub struct CommutatorExpansion {
    pub terms: Vec<(PauliIndex, f64)>,
}

impl CommutatorExpansion {
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

// All 256 expansions, computed once by direct matrix arithmetic. The matrix
// commutator is the definition; caching it avoids transcription errors that
// hand-coded structure-constant tables invite.
static COMMUTATOR_TABLE: Lazy<Vec<CommutatorExpansion>> = Lazy::new(|| {
    let mut table = Vec::with_capacity(256);
    for ak in 0..4 {
        for al in 0..4 {
            for bk in 0..4 {
                for bl in 0..4 {
                    let a = PauliIndex { k: ak, l: al };
                    let b = PauliIndex { k: bk, l: bl };
                    table.push(expand_commutator(a, b));
                }
            }
        }
    }
    table
});

fn expand_commutator(a: PauliIndex, b: PauliIndex) -> CommutatorExpansion {
    let pa = pauli_string(a);
    let pb = pauli_string(b);
    let comm = (pa * pb - pb * pa) * Complex64::new(0.0, 1.0);
    let mut terms = Vec::new();
    for &target in OBSERVABLE_BASIS.iter() {
        // Pauli strings are trace-orthogonal with Tr(P_e P_f) = 4 δ_ef.
        let coeff = (comm * pauli_string(target)).trace() / 4.0;
        debug_assert!(coeff.im.abs() < 1e-12);
        if coeff.re.abs() > 1e-12 {
            terms.push((target, coeff.re));
        }
    }
    CommutatorExpansion { terms }
}

/// Structure-constant expansion of `i·[P_a, P_b]` as real coefficients over
/// the observable basis. Returns the empty expansion when the two strings
/// commute.
pub fn commutator_expansion(a: PauliIndex, b: PauliIndex) -> CommutatorExpansion {
    COMMUTATOR_TABLE[((a.k * 4 + a.l) * 16) + b.k * 4 + b.l].clone()
}

/// The 15×15 real generator `A(J)` of `dv/dt = A(J) v`, rows and columns in
/// [`OBSERVABLE_BASIS`] order.
pub type GeneratorMatrix = SMatrix<f64, DIM, DIM>;

// ∂A/∂J_a for each of the 15 coupling slots, in basis order. With
// H = -(1/2) Σ J_a P_a (ħ = 1), the Heisenberg equation gives
// A[m][e] = -(1/2) Σ_a J_a c_{a,m,e} where i[P_a, P_m] = Σ_e c_{a,m,e} P_e.
static GENERATOR_BASIS: Lazy<[GeneratorMatrix; DIM]> = Lazy::new(|| {
    let mut out = [GeneratorMatrix::zeros(); DIM];
    for (slot, &coupling_idx) in OBSERVABLE_BASIS.iter().enumerate() {
        for (m, &obs) in OBSERVABLE_BASIS.iter().enumerate() {
            for &(target, coeff) in commutator_expansion(coupling_idx, obs).terms.iter() {
                let e = target.basis_position().expect("commutators are traceless");
                out[slot][(m, e)] = -0.5 * coeff;
            }
        }
    }
    out
});

/// ∂A/∂J for the coupling at `slot` in basis order.
pub fn generator_basis(slot: usize) -> &'static GeneratorMatrix {
    &GENERATOR_BASIS[slot]
}

/// Assemble the ODE generator for a coupling matrix.
pub fn generator(j: &CouplingMatrix) -> GeneratorMatrix {
    let mut a = GeneratorMatrix::zeros();
    for (slot, idx) in OBSERVABLE_BASIS.iter().enumerate() {
        let value = j.get(idx.k, idx.l);
        if value != 0.0 {
            a += GENERATOR_BASIS[slot] * value;
        }
    }
    a
}

/// Hamiltonian-family presets. `HZ` and `HXYZ` restrict which couplings are
/// active; `General` leaves all 15 free.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Preset {
    #[serde(rename = "z")]
    HZ,
    #[serde(rename = "xyz")]
    HXYZ,
    #[serde(rename = "general")]
    General,
}

impl Preset {
    /// Coupling indices trainable/samplable under this preset.
    pub fn active_indices(&self) -> Vec<PauliIndex> {
        match self {
            Preset::HZ => vec![
                PauliIndex { k: 0, l: 3 },
                PauliIndex { k: 3, l: 0 },
                PauliIndex { k: 3, l: 3 },
            ],
            Preset::HXYZ => vec![
                PauliIndex { k: 1, l: 1 },
                PauliIndex { k: 2, l: 2 },
                PauliIndex { k: 3, l: 3 },
            ],
            Preset::General => OBSERVABLE_BASIS.to_vec(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Preset::HZ => "z",
            Preset::HXYZ => "xyz",
            Preset::General => "general",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "z" => Ok(Preset::HZ),
            "xyz" => Ok(Preset::HXYZ),
            "general" => Ok(Preset::General),
            other => Err(Error::InvalidConfig(format!("unknown preset {other:?}"))),
        }
    }
}

/// Connected components of the sparsity graph of `A(J)` when the preset's
/// active couplings take generic nonzero values. Frozen observables appear
/// as singletons; for `HZ` and `HXYZ` the dynamically coupled observables
/// split into blocks of at most four.
pub fn decoupled_blocks(preset: Preset) -> Vec<Vec<PauliIndex>> {
    // Generic incommensurate values so no accidental cancellation hides an
    // edge of the sparsity pattern.
    let generic = [
        0.731, 1.279, 2.111, 0.547, 1.907, 0.389, 2.683, 1.531, 0.941, 2.221, 1.123, 0.673, 1.789,
        2.357, 0.853,
    ];
    let mut j = CouplingMatrix::zero();
    for (i, idx) in preset.active_indices().iter().enumerate() {
        j.set(idx.k, idx.l, generic[i]).expect("active index is never (0,0)");
    }
    let a = generator(&j);

    // Union-find over the 15 observables.
    let mut parent: Vec<usize> = (0..DIM).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let root = find(parent, parent[x]);
            parent[x] = root;
        }
        parent[x]
    }
    for m in 0..DIM {
        for e in 0..DIM {
            if a[(m, e)].abs() > 1e-12 {
                let rm = find(&mut parent, m);
                let re = find(&mut parent, e);
                if rm != re {
                    parent[rm] = re;
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<PauliIndex>> = Default::default();
    for m in 0..DIM {
        let root = find(&mut parent, m);
        groups.entry(root).or_default().push(OBSERVABLE_BASIS[m]);
    }
    let mut blocks: Vec<Vec<PauliIndex>> = groups.into_values().collect();
    blocks.sort_by_key(|b| b[0]);
    blocks
}
