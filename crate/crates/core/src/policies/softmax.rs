use serde::{Deserialize, Serialize};

use super::{argmax, Classifier, ContextBatch, StochasticPolicy, WeightMatrix};
use crate::error::{invalid, Result};
use crate::types::{ActionId, ContextVector};

/// Boltzmann policy over linear action scores: `π(a|x) ∝ exp(w_a·x / τ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftmaxLinearPolicy {
    weights: WeightMatrix,
    temperature: f64,
}

impl SoftmaxLinearPolicy {
    pub fn new(weights: WeightMatrix, temperature: f64) -> Result<Self> {
        if !(temperature > 0.0 && temperature.is_finite()) {
            return invalid(format!("temperature must be positive, got {temperature}"));
        }
        Ok(Self {
            weights,
            temperature,
        })
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            weights: WeightMatrix::zeros(n, m),
            temperature: 1.0,
        }
    }

    pub fn weights(&self) -> &WeightMatrix {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut WeightMatrix {
        &mut self.weights
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn dim(&self) -> usize {
        self.weights.dim()
    }

    pub fn logits(&self, x: &ContextVector) -> Vec<f64> {
        let mut out = self.weights.scores(x.values());
        for v in &mut out {
            *v /= self.temperature;
        }
        out
    }

    /// Like [`StochasticPolicy::probabilities`] but rejects mismatched dimensions.
    pub fn try_probabilities(&self, x: &ContextVector) -> Result<Vec<f64>> {
        self.weights.check_context(x)?;
        Ok(self.probabilities(x))
    }
}

/// In-place softmax with max subtraction.
pub(crate) fn softmax_in_place(v: &mut [f64]) {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for x in v.iter_mut() {
        *x = (*x - max).exp();
        total += *x;
    }
    for x in v.iter_mut() {
        *x /= total;
    }
}

impl StochasticPolicy for SoftmaxLinearPolicy {
    fn n_actions(&self) -> usize {
        self.weights.n_actions()
    }

    fn probabilities(&self, x: &ContextVector) -> Vec<f64> {
        let mut out = vec![0.0; self.n_actions()];
        self.probabilities_into(x, &mut out);
        out
    }

    fn probabilities_into(&self, x: &ContextVector, out: &mut [f64]) {
        let m = self.weights.dim();
        let inv_t = 1.0 / self.temperature;
        let xs = x.values();
        for (o, row) in out.iter_mut().zip(self.weights.as_slice().chunks_exact(m)) {
            *o = super::dot(row, xs) * inv_t;
        }
        softmax_in_place(out);
    }

    fn probabilities_batch(&self, batch: &ContextBatch<'_>, out: &mut [f64]) {
        let (rows, m, n) = (batch.contexts.len(), self.weights.dim(), self.n_actions());
        if rows == 0 {
            return;
        }
        assert_eq!(batch.dim, m, "context dimension does not match the policy");
        assert_eq!(batch.flat.len(), rows * m);
        assert_eq!(out.len(), rows * n);
        // out (rows × n) = flat (rows × m) · Wᵀ (m × n), scaled by 1/τ.
        // SAFETY: the asserts above pin every slice to the extents and
        // strides passed to dgemm.
        unsafe {
            matrixmultiply::dgemm(
                rows,
                m,
                n,
                1.0 / self.temperature,
                batch.flat.as_ptr(),
                m as isize,
                1,
                self.weights.as_slice().as_ptr(),
                1,
                m as isize,
                0.0,
                out.as_mut_ptr(),
                n as isize,
                1,
            );
        }
        for row in out.chunks_exact_mut(n) {
            softmax_in_place(row);
        }
    }
}

impl Classifier for SoftmaxLinearPolicy {
    fn predict(&self, x: &ContextVector) -> ActionId {
        ActionId(argmax(&self.weights.scores(x.values())))
    }
}
