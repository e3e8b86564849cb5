//! Dense and LSTM layers, the two actor-critic architectures, reverse-mode
//! gradients through recorded forward passes, and the Adam optimizer.
//!
//! Layers come in pairs: a plain forward for inference and a cached forward
//! that records what the matching backward pass needs. Network-level
//! backward walks the recorded step(s) in reverse, accumulating parameter
//! gradients into a zero-initialized clone of the network, so gradient
//! containers and parameter containers share one shape.
//!
//! Everything computes in f64.

mod adam;
mod bf;
mod dense;
mod lstm;
mod rf;

pub use adam::{adam_update, AdamState};
pub use bf::{BfNetworks, BfOutput, BfTrace, BF_HIDDEN_WIDTHS};
pub use dense::{dense_backward, dense_forward, dense_forward_cached, DenseParams, DenseTrace};
pub use lstm::{
    lstm_backward, lstm_step, lstm_step_cached, GateParams, LstmParams, LstmState, LstmTrace,
    RecurrentState,
};
pub use rf::{RfNetwork, RfOutput, RfStepTrace, RF_HEAD_WIDTHS};

use crate::env::ActionMask;
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NnError {
    #[error("shape mismatch in {context}: expected {expected}, got {got}")]
    ShapeMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("action mask allows no actions")]
    NoAllowedActions,
    #[error("non-finite gradient; update rejected")]
    NonFiniteGradient,
}

/// Row-major matrix of parameters; vectors are stored as single-column
/// tensors so optimizer state and serialization treat everything uniformly.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_data(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "tensor data matches shape");
        Self { rows, cols, data }
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: f64) {
        self.data[r * self.cols + c] = value;
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.rows, self.cols)
    }

    /// y = W x.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(x)
                    .map(|(w, v)| w * v)
                    .sum::<f64>()
            })
            .collect()
    }

    /// out += W^T g, streaming row-major.
    pub fn add_transposed_matvec(&self, g: &[f64], out: &mut [f64]) {
        debug_assert_eq!(g.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        for (r, &gr) in g.iter().enumerate() {
            if gr == 0.0 {
                continue;
            }
            for (o, w) in out.iter_mut().zip(self.row(r)) {
                *o += w * gr;
            }
        }
    }

    /// self += g x^T (outer-product accumulation).
    pub fn add_outer(&mut self, g: &[f64], x: &[f64]) {
        debug_assert_eq!(g.len(), self.rows);
        debug_assert_eq!(x.len(), self.cols);
        for (r, &gr) in g.iter().enumerate() {
            if gr == 0.0 {
                continue;
            }
            let row = &mut self.data[r * self.cols..(r + 1) * self.cols];
            for (w, &xv) in row.iter_mut().zip(x) {
                *w += gr * xv;
            }
        }
    }

    /// self += scale * other.
    pub fn add_scaled(&mut self, other: &Tensor, scale: f64) {
        debug_assert_eq!(self.shape(), other.shape());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += scale * b;
        }
    }
}

/// Uniform Xavier/Glorot initialization: entries i.i.d. on
/// [-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out))], returned as a
/// (fan_out x fan_in) matrix.
pub fn xavier_init(fan_in: usize, fan_out: usize, rng: &mut impl Rng) -> Tensor {
    assert!(fan_in >= 1 && fan_out >= 1);
    let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let data = (0..fan_in * fan_out)
        .map(|_| rng.gen_range(-bound..=bound))
        .collect();
    Tensor::from_data(fan_out, fan_in, data)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Softmax,
    Identity,
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable softmax (max-subtracted).
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Probabilities and log-probabilities of (optionally masked) logits.
///
/// Masked actions take logit -inf before normalization, so their
/// probability is exactly 0 and their log-probability -inf. Masking never
/// changes the ratio between two allowed actions' probabilities.
pub fn masked_log_softmax(
    logits: &[f64],
    mask: Option<&ActionMask>,
) -> Result<(Vec<f64>, Vec<f64>), NnError> {
    if let Some(mask) = mask {
        if mask.allowed.len() != logits.len() {
            return Err(NnError::ShapeMismatch {
                context: "action mask",
                expected: logits.len(),
                got: mask.allowed.len(),
            });
        }
        if mask.allowed_count() == 0 {
            return Err(NnError::NoAllowedActions);
        }
    }
    let masked: Vec<f64> = match mask {
        Some(m) => logits
            .iter()
            .zip(&m.allowed)
            .map(|(&l, &ok)| if ok { l } else { f64::NEG_INFINITY })
            .collect(),
        None => logits.to_vec(),
    };
    let max = masked.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = masked.iter().map(|&l| (l - max).exp()).sum();
    let log_sum = sum.ln();
    let log_probs: Vec<f64> = masked.iter().map(|&l| l - max - log_sum).collect();
    let probs: Vec<f64> = log_probs
        .iter()
        .map(|&lp| if lp == f64::NEG_INFINITY { 0.0 } else { lp.exp() })
        .collect();
    Ok((probs, log_probs))
}

/// Euclidean norm over a set of gradient tensors.
pub fn global_norm(tensors: &[&Tensor]) -> f64 {
    tensors
        .iter()
        .map(|t| t.as_slice().iter().map(|v| v * v).sum::<f64>())
        .sum::<f64>()
        .sqrt()
}

/// Scales gradients so their global norm does not exceed `max_norm`.
/// Returns the pre-clip norm and whether clipping fired.
pub fn clip_global_norm(tensors: &mut [&mut Tensor], max_norm: f64) -> (f64, bool) {
    let norm = {
        let views: Vec<&Tensor> = tensors.iter().map(|t| &**t).collect();
        global_norm(&views)
    };
    if norm > max_norm && norm > 0.0 {
        let scale = max_norm / norm;
        for t in tensors.iter_mut() {
            for v in t.as_mut_slice() {
                *v *= scale;
            }
        }
        (norm, true)
    } else {
        (norm, false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn xavier_bound_small_fans() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = xavier_init(3, 3, &mut rng);
        assert_eq!(t.shape(), (3, 3));
        // sqrt(6/6) = 1.
        assert!(t.as_slice().iter().all(|&v| (-1.0..=1.0).contains(&v)));
    }

    #[test]
    fn xavier_bound_large_fans() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = xavier_init(256, 128, &mut rng);
        let bound = (6.0f64 / 384.0).sqrt();
        assert!((bound - 0.125).abs() < 1e-3);
        assert!(t.as_slice().iter().all(|&v| v.abs() <= bound));
    }

    #[test]
    fn xavier_is_centered() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = xavier_init(100, 100, &mut rng);
        let mean = t.as_slice().iter().sum::<f64>() / t.len() as f64;
        assert!(mean.abs() < 0.02, "sample mean {mean}");
    }

    #[test]
    fn matvec_and_transpose_agree_with_naive() {
        let w = Tensor::from_data(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(w.matvec(&[1.0, 0.0, -1.0]), vec![-2.0, -2.0]);
        let mut out = vec![0.0; 3];
        w.add_transposed_matvec(&[1.0, -1.0], &mut out);
        assert_eq!(out, vec![-3.0, -3.0, -3.0]);
    }

    #[test]
    fn outer_accumulation() {
        let mut g = Tensor::zeros(2, 2);
        g.add_outer(&[1.0, 2.0], &[3.0, 4.0]);
        g.add_outer(&[1.0, 0.0], &[1.0, 1.0]);
        assert_eq!(g.as_slice(), &[4.0, 5.0, 6.0, 8.0]);
    }

    #[test]
    fn masked_softmax_zeroes_masked_entries() {
        let mask = ActionMask {
            allowed: vec![true, false, true, false],
        };
        let (probs, log_probs) =
            masked_log_softmax(&[0.3, 5.0, -0.2, 9.0], Some(&mask)).unwrap();
        assert_eq!(probs[1], 0.0);
        assert_eq!(probs[3], 0.0);
        assert_eq!(log_probs[1], f64::NEG_INFINITY);
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mask_preserves_allowed_ratios() {
        let logits = [0.7, -1.3, 2.2, 0.0];
        let (unmasked, _) = masked_log_softmax(&logits, None).unwrap();
        let mask = ActionMask {
            allowed: vec![true, true, false, true],
        };
        let (masked, _) = masked_log_softmax(&logits, Some(&mask)).unwrap();
        for (i, j) in [(0usize, 1usize), (0, 3), (1, 3)] {
            let r0 = unmasked[i] / unmasked[j];
            let r1 = masked[i] / masked[j];
            assert!((r0 - r1).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_mask_is_rejected() {
        let mask = ActionMask {
            allowed: vec![false, false],
        };
        assert_eq!(
            masked_log_softmax(&[0.0, 1.0], Some(&mask)),
            Err(NnError::NoAllowedActions)
        );
    }

    #[test]
    fn clip_scales_down_only() {
        let mut a = Tensor::from_data(1, 2, vec![3.0, 4.0]);
        let (norm, clipped) = clip_global_norm(&mut [&mut a], 10.0);
        assert_eq!(norm, 5.0);
        assert!(!clipped);
        let (norm, clipped) = clip_global_norm(&mut [&mut a], 2.5);
        assert_eq!(norm, 5.0);
        assert!(clipped);
        assert!((global_norm(&[&a]) - 2.5).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn softmax_is_a_distribution(logits in proptest::collection::vec(-30.0f64..30.0, 1..20)) {
            let p = softmax(&logits);
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(p.iter().all(|&v| v >= 0.0));
        }

        #[test]
        fn log_softmax_matches_softmax(
            logits in proptest::collection::vec(-20.0f64..20.0, 1..16),
        ) {
            let p = softmax(&logits);
            let (probs, log_probs) = masked_log_softmax(&logits, None).unwrap();
            for ((a, b), lp) in p.iter().zip(&probs).zip(&log_probs) {
                prop_assert!((a - b).abs() < 1e-12);
                prop_assert!((lp.exp() - a).abs() < 1e-12);
            }
        }
    }
}
