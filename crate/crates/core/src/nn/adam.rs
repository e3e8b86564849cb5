//! Adam optimizer with bias correction.

use super::{NnError, Tensor};

/// Per-parameter first/second moment accumulators plus the step counter.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<Tensor>,
    v: Vec<Tensor>,
    step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    /// Accumulators shaped like the given parameter tensors.
    pub fn new(params: &[&Tensor]) -> Self {
        Self {
            m: params.iter().map(|t| t.zeros_like()).collect(),
            v: params.iter().map(|t| t.zeros_like()).collect(),
            step: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }
}

/// One Adam update over a parameter set:
/// m <- b1 m + (1-b1) g; v <- b2 v + (1-b2) g^2;
/// theta <- theta - lr * m_hat / (sqrt(v_hat) + eps).
///
/// Rejects the whole update if any gradient entry is non-finite.
pub fn adam_update(
    params: &mut [&mut Tensor],
    grads: &[&Tensor],
    state: &mut AdamState,
    lr: f64,
) -> Result<(), NnError> {
    assert_eq!(params.len(), grads.len(), "parameter/gradient arity");
    assert_eq!(params.len(), state.m.len(), "optimizer state arity");
    for (p, g) in params.iter().zip(grads) {
        assert_eq!(p.shape(), g.shape(), "parameter/gradient shapes");
        if g.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(NnError::NonFiniteGradient);
        }
    }
    state.step += 1;
    let t = state.step as i32;
    let bias1 = 1.0 - state.beta1.powi(t);
    let bias2 = 1.0 - state.beta2.powi(t);
    for ((p, g), (m, v)) in params
        .iter_mut()
        .zip(grads)
        .zip(state.m.iter_mut().zip(state.v.iter_mut()))
    {
        let pm = p.as_mut_slice();
        for (k, &gk) in g.as_slice().iter().enumerate() {
            let mk = &mut m.as_mut_slice()[k];
            *mk = state.beta1 * *mk + (1.0 - state.beta1) * gk;
            let vk = &mut v.as_mut_slice()[k];
            *vk = state.beta2 * *vk + (1.0 - state.beta2) * gk * gk;
            let m_hat = *mk / bias1;
            let v_hat = *vk / bias2;
            pm[k] -= lr * m_hat / (v_hat.sqrt() + state.epsilon);
        }
    }
    Ok(())
}
