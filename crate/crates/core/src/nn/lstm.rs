//! LSTM cell with per-gate parameters and recorded steps for
//! backpropagation through time.

use super::{sigmoid, xavier_init, NnError, Tensor};
use rand::Rng;

/// One gate: input-to-hidden weights, hidden-to-hidden weights, bias.
#[derive(Debug, Clone, PartialEq)]
pub struct GateParams {
    pub w_input: Tensor,
    pub w_hidden: Tensor,
    pub bias: Tensor,
}

impl GateParams {
    fn xavier(input_size: usize, hidden_size: usize, bias: f64, rng: &mut impl Rng) -> Self {
        Self {
            w_input: xavier_init(input_size, hidden_size, rng),
            w_hidden: xavier_init(hidden_size, hidden_size, rng),
            bias: Tensor::filled(hidden_size, 1, bias),
        }
    }

    fn zeros(input_size: usize, hidden_size: usize) -> Self {
        Self {
            w_input: Tensor::zeros(hidden_size, input_size),
            w_hidden: Tensor::zeros(hidden_size, hidden_size),
            bias: Tensor::zeros(hidden_size, 1),
        }
    }

    fn preactivation(&self, x: &[f64], h: &[f64]) -> Vec<f64> {
        let mut z = self.w_input.matvec(x);
        let zh = self.w_hidden.matvec(h);
        for ((zv, hv), b) in z.iter_mut().zip(&zh).zip(self.bias.as_slice()) {
            *zv += hv + b;
        }
        z
    }

    pub fn tensors(&self) -> Vec<&Tensor> {
        vec![&self.w_input, &self.w_hidden, &self.bias]
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        vec![&mut self.w_input, &mut self.w_hidden, &mut self.bias]
    }
}

/// Parameters of one LSTM layer. The forget-gate bias initializes to 1,
/// everything else to Xavier weights and zero biases.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    pub input_gate: GateParams,
    pub forget_gate: GateParams,
    pub cell_gate: GateParams,
    pub output_gate: GateParams,
    input_size: usize,
    hidden_size: usize,
}

impl LstmParams {
    pub fn xavier(input_size: usize, hidden_size: usize, rng: &mut impl Rng) -> Self {
        Self {
            input_gate: GateParams::xavier(input_size, hidden_size, 0.0, rng),
            forget_gate: GateParams::xavier(input_size, hidden_size, 1.0, rng),
            cell_gate: GateParams::xavier(input_size, hidden_size, 0.0, rng),
            output_gate: GateParams::xavier(input_size, hidden_size, 0.0, rng),
            input_size,
            hidden_size,
        }
    }

    pub fn zeros(input_size: usize, hidden_size: usize) -> Self {
        Self {
            input_gate: GateParams::zeros(input_size, hidden_size),
            forget_gate: GateParams::zeros(input_size, hidden_size),
            cell_gate: GateParams::zeros(input_size, hidden_size),
            output_gate: GateParams::zeros(input_size, hidden_size),
            input_size,
            hidden_size,
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.input_size, self.hidden_size)
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn hidden_size(&self) -> usize {
        self.hidden_size
    }

    pub fn tensors(&self) -> Vec<&Tensor> {
        let mut out = self.input_gate.tensors();
        out.extend(self.forget_gate.tensors());
        out.extend(self.cell_gate.tensors());
        out.extend(self.output_gate.tensors());
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = self.input_gate.tensors_mut();
        out.extend(self.forget_gate.tensors_mut());
        out.extend(self.cell_gate.tensors_mut());
        out.extend(self.output_gate.tensors_mut());
        out
    }
}

/// Hidden and cell vectors of one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl LstmState {
    pub fn zeros(hidden_size: usize) -> Self {
        Self {
            h: vec![0.0; hidden_size],
            c: vec![0.0; hidden_size],
        }
    }
}

/// Recurrent memory across the stacked layers; zero-initialized at episode
/// start.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrentState {
    pub layers: Vec<LstmState>,
}

impl RecurrentState {
    pub fn zeros(hidden_size: usize, layer_count: usize) -> Self {
        Self {
            layers: (0..layer_count).map(|_| LstmState::zeros(hidden_size)).collect(),
        }
    }
}

/// Everything one recorded LSTM step needs for its backward pass.
#[derive(Debug, Clone)]
pub struct LstmTrace {
    pub input: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub c_prev: Vec<f64>,
    pub gate_i: Vec<f64>,
    pub gate_f: Vec<f64>,
    pub gate_g: Vec<f64>,
    pub gate_o: Vec<f64>,
    pub c_new: Vec<f64>,
    pub tanh_c_new: Vec<f64>,
}

fn check_shapes(params: &LstmParams, x: &[f64], state: &LstmState) -> Result<(), NnError> {
    if x.len() != params.input_size {
        return Err(NnError::ShapeMismatch {
            context: "lstm input",
            expected: params.input_size,
            got: x.len(),
        });
    }
    if state.h.len() != params.hidden_size || state.c.len() != params.hidden_size {
        return Err(NnError::ShapeMismatch {
            context: "lstm state",
            expected: params.hidden_size,
            got: state.h.len(),
        });
    }
    Ok(())
}

fn cell_math(params: &LstmParams, x: &[f64], state: &LstmState) -> LstmTrace {
    let gate_i: Vec<f64> = params
        .input_gate
        .preactivation(x, &state.h)
        .into_iter()
        .map(sigmoid)
        .collect();
    let gate_f: Vec<f64> = params
        .forget_gate
        .preactivation(x, &state.h)
        .into_iter()
        .map(sigmoid)
        .collect();
    let gate_g: Vec<f64> = params
        .cell_gate
        .preactivation(x, &state.h)
        .into_iter()
        .map(f64::tanh)
        .collect();
    let gate_o: Vec<f64> = params
        .output_gate
        .preactivation(x, &state.h)
        .into_iter()
        .map(sigmoid)
        .collect();
    let c_new: Vec<f64> = (0..params.hidden_size)
        .map(|k| gate_f[k] * state.c[k] + gate_i[k] * gate_g[k])
        .collect();
    let tanh_c_new: Vec<f64> = c_new.iter().map(|&c| c.tanh()).collect();
    LstmTrace {
        input: x.to_vec(),
        h_prev: state.h.clone(),
        c_prev: state.c.clone(),
        gate_i,
        gate_f,
        gate_g,
        gate_o,
        c_new,
        tanh_c_new,
    }
}

fn state_from_trace(trace: &LstmTrace) -> LstmState {
    let h: Vec<f64> = trace
        .gate_o
        .iter()
        .zip(&trace.tanh_c_new)
        .map(|(o, t)| o * t)
        .collect();
    LstmState {
        h,
        c: trace.c_new.clone(),
    }
}

/// One LSTM step: f = sig, i = sig, g = tanh, o = sig;
/// c' = f*c + i*g; h' = o*tanh(c'). Returns (output, new state); the output
/// is the new hidden vector.
pub fn lstm_step(
    params: &LstmParams,
    x: &[f64],
    state: &LstmState,
) -> Result<(Vec<f64>, LstmState), NnError> {
    check_shapes(params, x, state)?;
    let trace = cell_math(params, x, state);
    let new_state = state_from_trace(&trace);
    Ok((new_state.h.clone(), new_state))
}

/// [`lstm_step`] that also records the step for [`lstm_backward`].
pub fn lstm_step_cached(
    params: &LstmParams,
    x: &[f64],
    state: &LstmState,
) -> Result<(Vec<f64>, LstmState, LstmTrace), NnError> {
    check_shapes(params, x, state)?;
    let trace = cell_math(params, x, state);
    let new_state = state_from_trace(&trace);
    Ok((new_state.h.clone(), new_state, trace))
}

/// Reverse step for one recorded LSTM forward.
///
/// `dh` and `dc` are the gradients flowing into this step's outputs (the new
/// hidden and cell vectors). Parameter gradients accumulate into `grads`;
/// the return value is (d input, d h_prev, d c_prev) for chaining through
/// time.
pub fn lstm_backward(
    params: &LstmParams,
    trace: &LstmTrace,
    dh: &[f64],
    dc: &[f64],
    grads: &mut LstmParams,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let hidden = params.hidden_size;
    debug_assert_eq!(dh.len(), hidden);
    debug_assert_eq!(dc.len(), hidden);

    let mut d_gate_o = vec![0.0; hidden];
    let mut dc_total = vec![0.0; hidden];
    for k in 0..hidden {
        d_gate_o[k] = dh[k] * trace.tanh_c_new[k];
        let d_tanh = dh[k] * trace.gate_o[k];
        dc_total[k] = dc[k] + d_tanh * (1.0 - trace.tanh_c_new[k] * trace.tanh_c_new[k]);
    }

    let mut dz_i = vec![0.0; hidden];
    let mut dz_f = vec![0.0; hidden];
    let mut dz_g = vec![0.0; hidden];
    let mut dz_o = vec![0.0; hidden];
    let mut dc_prev = vec![0.0; hidden];
    for k in 0..hidden {
        let (i, f, g, o) = (
            trace.gate_i[k],
            trace.gate_f[k],
            trace.gate_g[k],
            trace.gate_o[k],
        );
        dz_i[k] = dc_total[k] * g * i * (1.0 - i);
        dz_f[k] = dc_total[k] * trace.c_prev[k] * f * (1.0 - f);
        dz_g[k] = dc_total[k] * i * (1.0 - g * g);
        dz_o[k] = d_gate_o[k] * o * (1.0 - o);
        dc_prev[k] = dc_total[k] * f;
    }

    let mut dx = vec![0.0; params.input_size];
    let mut dh_prev = vec![0.0; hidden];
    for (gate, ggrads, dz) in [
        (&params.input_gate, &mut grads.input_gate, &dz_i),
        (&params.forget_gate, &mut grads.forget_gate, &dz_f),
        (&params.cell_gate, &mut grads.cell_gate, &dz_g),
        (&params.output_gate, &mut grads.output_gate, &dz_o),
    ] {
        ggrads.w_input.add_outer(dz, &trace.input);
        ggrads.w_hidden.add_outer(dz, &trace.h_prev);
        for (b, d) in ggrads.bias.as_mut_slice().iter_mut().zip(dz) {
            *b += d;
        }
        gate.w_input.add_transposed_matvec(dz, &mut dx);
        gate.w_hidden.add_transposed_matvec(dz, &mut dh_prev);
    }
    (dx, dh_prev, dc_prev)
}
