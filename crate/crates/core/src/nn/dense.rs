//! Fully connected layer with recorded forward passes.

use super::{softmax, xavier_init, Activation, NnError, Tensor};
use rand::Rng;

/// Weights (out x in) and bias (out x 1) of one dense layer.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseParams {
    pub weights: Tensor,
    pub bias: Tensor,
}

impl DenseParams {
    /// Xavier-initialized weights, zero bias.
    pub fn xavier(in_dim: usize, out_dim: usize, rng: &mut impl Rng) -> Self {
        Self {
            weights: xavier_init(in_dim, out_dim, rng),
            bias: Tensor::zeros(out_dim, 1),
        }
    }

    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            weights: Tensor::zeros(out_dim, in_dim),
            bias: Tensor::zeros(out_dim, 1),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            weights: self.weights.zeros_like(),
            bias: self.bias.zeros_like(),
        }
    }

    pub fn in_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.rows()
    }

    pub fn tensors(&self) -> Vec<&Tensor> {
        vec![&self.weights, &self.bias]
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        vec![&mut self.weights, &mut self.bias]
    }
}

/// What the backward pass needs from one dense forward.
#[derive(Debug, Clone)]
pub struct DenseTrace {
    pub input: Vec<f64>,
    pub preactivation: Vec<f64>,
}

fn affine(params: &DenseParams, x: &[f64]) -> Result<Vec<f64>, NnError> {
    if x.len() != params.in_dim() {
        return Err(NnError::ShapeMismatch {
            context: "dense input",
            expected: params.in_dim(),
            got: x.len(),
        });
    }
    let mut z = params.weights.matvec(x);
    for (zv, b) in z.iter_mut().zip(params.bias.as_slice()) {
        *zv += b;
    }
    Ok(z)
}

fn activate(z: Vec<f64>, activation: Activation) -> Vec<f64> {
    match activation {
        Activation::Identity => z,
        Activation::Relu => z.into_iter().map(|v| v.max(0.0)).collect(),
        Activation::Softmax => softmax(&z),
    }
}

/// activation(W x + b).
pub fn dense_forward(
    params: &DenseParams,
    x: &[f64],
    activation: Activation,
) -> Result<Vec<f64>, NnError> {
    Ok(activate(affine(params, x)?, activation))
}

/// Forward pass that records its inputs for [`dense_backward`].
pub fn dense_forward_cached(
    params: &DenseParams,
    x: &[f64],
    activation: Activation,
) -> Result<(Vec<f64>, DenseTrace), NnError> {
    let z = affine(params, x)?;
    let trace = DenseTrace {
        input: x.to_vec(),
        preactivation: z.clone(),
    };
    Ok((activate(z, activation), trace))
}

/// Reverse step for one recorded dense forward: accumulates parameter
/// gradients into `grads` and returns the gradient with respect to the
/// layer input.
pub fn dense_backward(
    params: &DenseParams,
    trace: &DenseTrace,
    activation: Activation,
    grad_out: &[f64],
    grads: &mut DenseParams,
) -> Vec<f64> {
    debug_assert_eq!(grad_out.len(), params.out_dim());
    let dz: Vec<f64> = match activation {
        Activation::Identity => grad_out.to_vec(),
        Activation::Relu => trace
            .preactivation
            .iter()
            .zip(grad_out)
            .map(|(&z, &g)| if z > 0.0 { g } else { 0.0 })
            .collect(),
        Activation::Softmax => {
            // dz_j = p_j (g_j - sum_k g_k p_k)
            let p = softmax(&trace.preactivation);
            let dot: f64 = p.iter().zip(grad_out).map(|(pv, g)| pv * g).sum();
            p.iter().zip(grad_out).map(|(&pv, &g)| pv * (g - dot)).collect()
        }
    };
    for (b, d) in grads.bias.as_mut_slice().iter_mut().zip(&dz) {
        *b += d;
    }
    grads.weights.add_outer(&dz, &trace.input);
    let mut dx = vec![0.0; params.in_dim()];
    params.weights.add_transposed_matvec(&dz, &mut dx);
    dx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_params() -> DenseParams {
        DenseParams {
            weights: Tensor::from_data(2, 2, vec![1.0, 0.0, 0.0, 1.0]),
            bias: Tensor::zeros(2, 1),
        }
    }

    #[test]
    fn relu_clamps_negatives() {
        let out = dense_forward(&identity_params(), &[-1.0, 2.0], Activation::Relu).unwrap();
        assert_eq!(out, vec![0.0, 2.0]);
    }

    #[test]
    fn softmax_of_equal_logits_is_uniform() {
        let params = DenseParams {
            weights: Tensor::zeros(3, 1),
            bias: Tensor::filled(3, 1, 0.7),
        };
        let out = dense_forward(&params, &[5.0], Activation::Softmax).unwrap();
        for p in out {
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn shape_mismatch_is_reported() {
        assert_eq!(
            dense_forward(&identity_params(), &[1.0], Activation::Identity),
            Err(NnError::ShapeMismatch {
                context: "dense input",
                expected: 2,
                got: 1
            })
        );
    }

    #[test]
    fn linear_sum_gradient_is_outer_product() {
        // loss = sum(W x + b): dW = 1 x^T, db = 1, dx = W^T 1.
        let params = DenseParams {
            weights: Tensor::from_data(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]),
            bias: Tensor::zeros(2, 1),
        };
        let x = [0.5, -1.0, 2.0];
        let (_, trace) = dense_forward_cached(&params, &x, Activation::Identity).unwrap();
        let mut grads = params.zeros_like();
        let dx = dense_backward(&params, &trace, Activation::Identity, &[1.0, 1.0], &mut grads);
        assert_eq!(grads.weights.as_slice(), &[0.5, -1.0, 2.0, 0.5, -1.0, 2.0]);
        assert_eq!(grads.bias.as_slice(), &[1.0, 1.0]);
        assert_eq!(dx, vec![5.0, 7.0, 9.0]);
    }

    #[test]
    fn zero_output_gradient_gives_zero_parameter_gradients() {
        let params = identity_params();
        let (_, trace) = dense_forward_cached(&params, &[1.0, -2.0], Activation::Relu).unwrap();
        let mut grads = params.zeros_like();
        let dx = dense_backward(&params, &trace, Activation::Relu, &[0.0, 0.0], &mut grads);
        assert!(grads.weights.as_slice().iter().all(|&v| v == 0.0));
        assert!(grads.bias.as_slice().iter().all(|&v| v == 0.0));
        assert!(dx.iter().all(|&v| v == 0.0));
    }
}
