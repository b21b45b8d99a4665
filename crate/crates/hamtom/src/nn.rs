//! Surrogate network and differentiation engine.
//!
//! A dense feedforward net maps normalized time (one scalar) to the 15
//! observable components. Hidden layers use tanh, the output layer is
//! linear. Two derivative paths are provided:
//!
//! - the exact derivative of the outputs with respect to the time input,
//!   propagated forward as a tangent alongside the primal pass, and
//! - reverse-mode gradients of any scalar loss with respect to all weights
//!   and biases, including losses that involve the time derivative itself
//!   (the PINN residual needs d/dt of the network inside the loss).
//!
//! Everything is batched: a pass evaluates the whole time grid as one set
//! of matrix products.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::pauli::DIM;
use crate::{Error, Result};

/// Dense feedforward model, input width 1, output width [`DIM`].
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkModel {
    widths: Vec<usize>,
    /// weights[i] has shape widths[i+1] × widths[i].
    weights: Vec<DMatrix<f64>>,
    biases: Vec<DVector<f64>>,
}

/// Default hidden architecture.
pub const DEFAULT_HIDDEN: &[usize] = &[32, 32];

impl NetworkModel {
    /// Initialize with hidden weights uniform in ±1/√fan-in and the final
    /// layer zeroed, so the initial surrogate is the zero trajectory.
    pub fn init(hidden: &[usize], seed: u64) -> Result<Self> {
        if hidden.iter().any(|&w| w == 0) {
            return Err(Error::InvalidConfig("zero-width hidden layer".into()));
        }
        let mut widths = Vec::with_capacity(hidden.len() + 2);
        widths.push(1);
        widths.extend_from_slice(hidden);
        widths.push(DIM);

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = widths.len() - 1;
        let mut weights = Vec::with_capacity(layers);
        let mut biases = Vec::with_capacity(layers);
        for i in 0..layers {
            let (rows, cols) = (widths[i + 1], widths[i]);
            if i + 1 == layers {
                weights.push(DMatrix::zeros(rows, cols));
                biases.push(DVector::zeros(rows));
            } else {
                let scale = 1.0 / (cols as f64).sqrt();
                weights.push(DMatrix::from_fn(rows, cols, |_, _| {
                    rng.gen_range(-scale..scale)
                }));
                biases.push(DVector::from_fn(rows, |_, _| rng.gen_range(-scale..scale)));
            }
        }
        Ok(Self {
            widths,
            weights,
            biases,
        })
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    fn layer_count(&self) -> usize {
        self.widths.len() - 1
    }

    /// Total number of trainable scalars.
    pub fn param_count(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>()
            + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    /// Append all parameters (per layer: weights column-major, then bias).
    pub fn flatten_into(&self, out: &mut Vec<f64>) {
        for i in 0..self.layer_count() {
            out.extend(self.weights[i].iter());
            out.extend(self.biases[i].iter());
        }
    }

    /// Overwrite all parameters from a flat slice in [`flatten_into`] order.
    pub fn unflatten_from(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.param_count());
        let mut offset = 0;
        for i in 0..self.layer_count() {
            let wlen = self.weights[i].len();
            self.weights[i]
                .iter_mut()
                .zip(&params[offset..offset + wlen])
                .for_each(|(dst, &src)| *dst = src);
            offset += wlen;
            let blen = self.biases[i].len();
            self.biases[i]
                .iter_mut()
                .zip(&params[offset..offset + blen])
                .for_each(|(dst, &src)| *dst = src);
            offset += blen;
        }
    }

    /// Evaluate the network at one time point.
    pub fn forward(&self, t_norm: f64) -> DVector<f64> {
        let tape = self.evaluate(&[t_norm]);
        tape.values().column(0).into()
    }

    /// Value and exact d/dt_norm at one time point.
    pub fn forward_with_time_derivative(&self, t_norm: f64) -> (DVector<f64>, DVector<f64>) {
        let tape = self.evaluate(&[t_norm]);
        (
            tape.values().column(0).into(),
            tape.derivatives().column(0).into(),
        )
    }

    /// Batched primal + tangent pass over a grid of inputs. The returned
    /// tape holds everything the reverse pass needs.
    pub fn evaluate(&self, inputs: &[f64]) -> Tape {
        let m = inputs.len();
        let layers = self.layer_count();
        let mut activations = Vec::with_capacity(layers + 1);
        let mut tangents = Vec::with_capacity(layers + 1);
        let mut pre_tangents = Vec::with_capacity(layers);

        activations.push(DMatrix::from_row_slice(1, m, inputs));
        tangents.push(DMatrix::from_element(1, m, 1.0));

        for i in 0..layers {
            let mut z = &self.weights[i] * &activations[i];
            for mut col in z.column_iter_mut() {
                col += &self.biases[i];
            }
            let zt = &self.weights[i] * &tangents[i];
            if i + 1 == layers {
                // linear output layer
                pre_tangents.push(zt.clone());
                activations.push(z);
                tangents.push(zt);
            } else {
                let s = z.map(f64::tanh);
                let sp = s.map(|v| 1.0 - v * v);
                let at = sp.component_mul(&zt);
                pre_tangents.push(zt);
                activations.push(s);
                tangents.push(at);
            }
        }
        Tape {
            activations,
            tangents,
            pre_tangents,
        }
    }

    /// Reverse pass: given the loss gradients with respect to the outputs
    /// (`seed_values`) and with respect to the time derivatives of the
    /// outputs (`seed_derivatives`), both 15×M, accumulate gradients for
    /// every weight and bias.
    pub fn backward(
        &self,
        tape: &Tape,
        seed_values: &DMatrix<f64>,
        seed_derivatives: &DMatrix<f64>,
    ) -> GradientBuffer {
        let layers = self.layer_count();
        let mut grad = GradientBuffer::zeros_like(self);

        let mut g_a = seed_values.clone();
        let mut g_at = seed_derivatives.clone();

        for i in (0..layers).rev() {
            let (g_z, g_zt) = if i + 1 == layers {
                (g_a.clone(), g_at.clone())
            } else {
                let s = &tape.activations[i + 1];
                let zt = &tape.pre_tangents[i];
                let sp = s.map(|v| 1.0 - v * v);
                // a = tanh(z), ȧ = (1-a²)·ż:
                //   ∂a/∂z = 1-a², ∂ȧ/∂z = -2a(1-a²)ż, ∂ȧ/∂ż = 1-a²
                let mut g_z = sp.component_mul(&g_a);
                g_z += s
                    .map(|v| -2.0 * v)
                    .component_mul(&sp)
                    .component_mul(zt)
                    .component_mul(&g_at);
                let g_zt = sp.component_mul(&g_at);
                (g_z, g_zt)
            };
            grad.weights[i] = &g_z * tape.activations[i].transpose()
                + &g_zt * tape.tangents[i].transpose();
            grad.biases[i] = DVector::from_iterator(
                g_z.nrows(),
                g_z.row_iter().map(|r| r.iter().sum::<f64>()),
            );
            if i > 0 {
                g_a = self.weights[i].transpose() * g_z;
                g_at = self.weights[i].transpose() * g_zt;
            }
        }
        grad
    }

    /// Versioned checkpoint document.
    pub fn to_checkpoint(&self) -> Checkpoint {
        Checkpoint {
            version: 1,
            widths: self.widths.clone(),
            layers: (0..self.layer_count())
                .map(|i| CheckpointLayer {
                    weights: self.weights[i].iter().copied().collect(),
                    bias: self.biases[i].iter().copied().collect(),
                })
                .collect(),
        }
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        if ckpt.version != 1 {
            return Err(Error::InvalidConfig(format!(
                "unsupported checkpoint version {}",
                ckpt.version
            )));
        }
        if ckpt.widths.len() < 2 || ckpt.widths[0] != 1 || *ckpt.widths.last().unwrap() != DIM {
            return Err(Error::InvalidConfig("bad checkpoint widths".into()));
        }
        if ckpt.layers.len() != ckpt.widths.len() - 1 {
            return Err(Error::InvalidConfig("layer count mismatch".into()));
        }
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for (i, layer) in ckpt.layers.iter().enumerate() {
            let (rows, cols) = (ckpt.widths[i + 1], ckpt.widths[i]);
            if layer.weights.len() != rows * cols || layer.bias.len() != rows {
                return Err(Error::InvalidConfig(format!("layer {i} size mismatch")));
            }
            weights.push(DMatrix::from_column_slice(rows, cols, &layer.weights));
            biases.push(DVector::from_column_slice(&layer.bias));
        }
        Ok(Self {
            widths: ckpt.widths.clone(),
            weights,
            biases,
        })
    }
}

/// Saved primal + tangent pass.
pub struct Tape {
    /// Post-activation values per layer; `activations[0]` is the input row.
    activations: Vec<DMatrix<f64>>,
    /// d(activation)/d(input) per layer.
    tangents: Vec<DMatrix<f64>>,
    /// Pre-activation tangents ż per layer (needed by the reverse pass).
    pre_tangents: Vec<DMatrix<f64>>,
}

impl Tape {
    /// Network outputs, 15×M.
    pub fn values(&self) -> &DMatrix<f64> {
        self.activations.last().expect("nonempty")
    }

    /// Exact d(output)/d(input), 15×M.
    pub fn derivatives(&self) -> &DMatrix<f64> {
        self.tangents.last().expect("nonempty")
    }
}

/// Per-layer gradient accumulator, same shapes as the model.
#[derive(Clone, Debug)]
pub struct GradientBuffer {
    pub weights: Vec<DMatrix<f64>>,
    pub biases: Vec<DVector<f64>>,
}

impl GradientBuffer {
    pub fn zeros_like(model: &NetworkModel) -> Self {
        Self {
            weights: model
                .weights
                .iter()
                .map(|w| DMatrix::zeros(w.nrows(), w.ncols()))
                .collect(),
            biases: model.biases.iter().map(|b| DVector::zeros(b.len())).collect(),
        }
    }

    pub fn add(&mut self, other: &GradientBuffer) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            *a += b;
        }
        for (a, b) in self.biases.iter_mut().zip(&other.biases) {
            *a += b;
        }
    }

    /// Flatten in the same order as [`NetworkModel::flatten_into`].
    pub fn flatten_into(&self, out: &mut Vec<f64>) {
        for i in 0..self.weights.len() {
            out.extend(self.weights[i].iter());
            out.extend(self.biases[i].iter());
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckpointLayer {
    /// Column-major weight entries.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Self-describing model dump; `version` guards the layout.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub widths: Vec<usize>,
    pub layers: Vec<CheckpointLayer>,
}
