//! Feedforward actor-critic for the binary formulation: two fully disjoint
//! dense networks (256, 512, 256) for policy and value.

use super::{
    dense_backward, dense_forward, dense_forward_cached, masked_log_softmax, Activation,
    DenseParams, DenseTrace, NnError, Tensor,
};
use crate::env::ActionMask;
use rand::Rng;

/// Hidden widths of both networks.
pub const BF_HIDDEN_WIDTHS: [usize; 3] = [256, 512, 256];

#[derive(Debug, Clone, PartialEq)]
pub struct BfNetworks {
    pub policy_net: Vec<DenseParams>,
    pub value_net: Vec<DenseParams>,
    b: usize,
}

#[derive(Debug, Clone)]
pub struct BfOutput {
    pub probs: Vec<f64>,
    pub log_probs: Vec<f64>,
    pub value: f64,
}

/// Recorded forward through one of the two networks.
#[derive(Debug, Clone)]
pub struct BfTrace {
    pub layers: Vec<DenseTrace>,
}

fn build_net(input: usize, output: usize, rng: &mut impl Rng) -> Vec<DenseParams> {
    let mut layers = Vec::with_capacity(BF_HIDDEN_WIDTHS.len() + 1);
    let mut prev = input;
    for &width in &BF_HIDDEN_WIDTHS {
        layers.push(DenseParams::xavier(prev, width, rng));
        prev = width;
    }
    layers.push(DenseParams::xavier(prev, output, rng));
    layers
}

fn net_activation(layer_index: usize, layer_count: usize) -> Activation {
    if layer_index + 1 == layer_count {
        Activation::Identity
    } else {
        Activation::Relu
    }
}

fn run_net(layers: &[DenseParams], input: &[f64]) -> Result<Vec<f64>, NnError> {
    let mut x = input.to_vec();
    for (i, layer) in layers.iter().enumerate() {
        x = dense_forward(layer, &x, net_activation(i, layers.len()))?;
    }
    Ok(x)
}

fn run_net_cached(
    layers: &[DenseParams],
    input: &[f64],
) -> Result<(Vec<f64>, BfTrace), NnError> {
    let mut x = input.to_vec();
    let mut traces = Vec::with_capacity(layers.len());
    for (i, layer) in layers.iter().enumerate() {
        let (out, trace) = dense_forward_cached(layer, &x, net_activation(i, layers.len()))?;
        traces.push(trace);
        x = out;
    }
    Ok((x, BfTrace { layers: traces }))
}

fn net_backward(
    layers: &[DenseParams],
    trace: &BfTrace,
    grad_out: &[f64],
    grads: &mut [DenseParams],
) {
    let mut g = grad_out.to_vec();
    for i in (0..layers.len()).rev() {
        g = dense_backward(
            &layers[i],
            &trace.layers[i],
            net_activation(i, layers.len()),
            &g,
            &mut grads[i],
        );
    }
}

impl BfNetworks {
    pub fn new(b: usize, rng: &mut impl Rng) -> Self {
        assert!(b >= 1, "need at least one bit");
        Self {
            policy_net: build_net(b, 2 * b, rng),
            value_net: build_net(b, 1, rng),
            b,
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            policy_net: self.policy_net.iter().map(|l| l.zeros_like()).collect(),
            value_net: self.value_net.iter().map(|l| l.zeros_like()).collect(),
            b: self.b,
        }
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn action_count(&self) -> usize {
        2 * self.b
    }

    fn check_obs(&self, obs: &[f64]) -> Result<(), NnError> {
        if obs.len() != self.b {
            return Err(NnError::ShapeMismatch {
                context: "bf observation",
                expected: self.b,
                got: obs.len(),
            });
        }
        Ok(())
    }

    /// Masked action distribution and state value. Masked actions receive
    /// probability exactly 0 (their logits are -inf before normalization).
    pub fn forward(&self, obs: &[f64], mask: Option<&ActionMask>) -> Result<BfOutput, NnError> {
        self.check_obs(obs)?;
        let logits = run_net(&self.policy_net, obs)?;
        let (probs, log_probs) = masked_log_softmax(&logits, mask)?;
        let value = run_net(&self.value_net, obs)?[0];
        Ok(BfOutput {
            probs,
            log_probs,
            value,
        })
    }

    /// Recorded policy forward; returns raw logits (mask applied by the
    /// caller via [`masked_log_softmax`]).
    pub fn policy_logits_cached(&self, obs: &[f64]) -> Result<(Vec<f64>, BfTrace), NnError> {
        self.check_obs(obs)?;
        run_net_cached(&self.policy_net, obs)
    }

    pub fn value_cached(&self, obs: &[f64]) -> Result<(f64, BfTrace), NnError> {
        self.check_obs(obs)?;
        let (out, trace) = run_net_cached(&self.value_net, obs)?;
        Ok((out[0], trace))
    }

    pub fn backward_policy(&self, trace: &BfTrace, dlogits: &[f64], grads: &mut BfNetworks) {
        net_backward(&self.policy_net, trace, dlogits, &mut grads.policy_net);
    }

    pub fn backward_value(&self, trace: &BfTrace, dvalue: f64, grads: &mut BfNetworks) {
        net_backward(&self.value_net, trace, &[dvalue], &mut grads.value_net);
    }

    pub fn policy_tensors(&self) -> Vec<&Tensor> {
        self.policy_net.iter().flat_map(|l| l.tensors()).collect()
    }

    pub fn policy_tensors_mut(&mut self) -> Vec<&mut Tensor> {
        self.policy_net
            .iter_mut()
            .flat_map(|l| l.tensors_mut())
            .collect()
    }

    pub fn value_tensors(&self) -> Vec<&Tensor> {
        self.value_net.iter().flat_map(|l| l.tensors()).collect()
    }

    pub fn value_tensors_mut(&mut self) -> Vec<&mut Tensor> {
        self.value_net
            .iter_mut()
            .flat_map(|l| l.tensors_mut())
            .collect()
    }

    /// Every tensor of both networks: policy first, then value.
    pub fn tensors(&self) -> Vec<&Tensor> {
        let mut out = self.policy_tensors();
        out.extend(self.value_tensors());
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out: Vec<&mut Tensor> = Vec::new();
        for layer in &mut self.policy_net {
            out.extend(layer.tensors_mut());
        }
        for layer in &mut self.value_net {
            out.extend(layer.tensors_mut());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitseq::BitSequence;
    use crate::env::BfEnv;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small_net() -> BfNetworks {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        BfNetworks::new(2, &mut rng)
    }

    #[test]
    fn unmasked_probabilities_sum_to_one() {
        let net = small_net();
        let out = net.forward(&[1.0, 0.0], None).unwrap();
        assert_eq!(out.probs.len(), 4);
        assert!((out.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wanderer_mask_leaves_b_nonzero_probabilities() {
        let net = small_net();
        let state = BitSequence::from_bits(vec![1u8, 0]).unwrap();
        let mask = BfEnv::wanderer_mask(&state);
        let out = net.forward(&state.to_f64(), Some(&mask)).unwrap();
        let nonzero = out.probs.iter().filter(|&&p| p > 0.0).count();
        assert_eq!(nonzero, 2);
        assert!((out.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for (p, allowed) in out.probs.iter().zip(&mask.allowed) {
            assert_eq!(*p == 0.0, !allowed);
        }
    }

    #[test]
    fn masking_preserves_allowed_ratios() {
        let net = small_net();
        let obs = [0.0, 1.0];
        let unmasked = net.forward(&obs, None).unwrap();
        let mask = ActionMask {
            allowed: vec![true, true, false, true],
        };
        let masked = net.forward(&obs, Some(&mask)).unwrap();
        let r0 = unmasked.probs[0] / unmasked.probs[3];
        let r1 = masked.probs[0] / masked.probs[3];
        assert!((r0 - r1).abs() < 1e-12);
    }

    /// Independent composition check with naive loops.
    #[test]
    fn matches_layer_by_layer_evaluation() {
        let net = small_net();
        let obs = [1.0, 1.0];
        let mut x = obs.to_vec();
        for (i, layer) in net.policy_net.iter().enumerate() {
            let mut next = vec![0.0; layer.out_dim()];
            for (r, nv) in next.iter_mut().enumerate() {
                let mut acc = layer.bias.as_slice()[r];
                for (c, &xv) in x.iter().enumerate() {
                    acc += layer.weights.get(r, c) * xv;
                }
                *nv = if i + 1 < net.policy_net.len() {
                    acc.max(0.0)
                } else {
                    acc
                };
            }
            x = next;
        }
        let expected = crate::nn::softmax(&x);
        let out = net.forward(&obs, None).unwrap();
        for (a, b) in out.probs.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn networks_share_no_tensors() {
        let net = small_net();
        // Policy and value parameter sets are fully disjoint allocations.
        let policy_ptrs: Vec<*const f64> = net
            .policy_tensors()
            .iter()
            .map(|t| t.as_slice().as_ptr())
            .collect();
        for t in net.value_tensors() {
            assert!(!policy_ptrs.contains(&t.as_slice().as_ptr()));
        }
    }
}
