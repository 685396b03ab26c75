//! LSTM cell forward/backward passes, unidirectional and bidirectional
//! sequence layers, and the two bridge layers (repeat-vector and
//! time-distributed dense) used by the sequence autoencoder.
//!
//! The cell computes, per timestep, with `z = [h_prev, x_t]`:
//!
//! ```text
//! f = sigmoid(w_f z + b_f)          forget gate
//! c_bar = tanh(w_c z + b_c)         candidate cell state
//! i = sigmoid(w_i z + b_i)          input gate
//! c = f . c_prev + i . c_bar        cell state
//! o = sigmoid(w_o z + b_o)          output gate
//! h = o . tanh(c)                   hidden state
//! ```
//!
//! Backward passes are the exact reverse-mode derivatives of that
//! composition, accumulated over timesteps (BPTT).

use crate::error::{Error, Result};
use crate::linalg::{
    add_vec, concat, matvec, matvec_transpose, outer, sigmoid_vec, tanh_vec, Matrix, Rng,
};

/// All weights and biases of one LSTM cell. Each weight matrix has shape
/// `hidden x (hidden + input)` and acts on the concatenated `[h_prev, x_t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmCellParams {
    pub hidden: usize,
    pub input: usize,
    pub w_f: Matrix,
    pub w_i_gate: Matrix,
    pub w_c: Matrix,
    pub w_o: Matrix,
    pub b_f: Vec<f64>,
    pub b_i_gate: Vec<f64>,
    pub b_c: Vec<f64>,
    pub b_o: Vec<f64>,
}

impl LstmCellParams {
    /// Glorot-initialized weights; biases zero except the forget-gate bias,
    /// which starts at 1.0 to keep the cell state flowing early in training.
    pub fn new(hidden: usize, input: usize, rng: &mut Rng) -> Result<Self> {
        if hidden == 0 || input == 0 {
            return Err(Error::InvalidArgument(format!(
                "LSTM cell requires hidden >= 1 and input >= 1, got ({hidden}, {input})"
            )));
        }
        let fan_in = hidden + input;
        let gate = |rng: &mut Rng| crate::linalg::glorot_uniform(rng, fan_in, hidden);
        Ok(LstmCellParams {
            hidden,
            input,
            w_f: gate(rng)?,
            w_i_gate: gate(rng)?,
            w_c: gate(rng)?,
            w_o: gate(rng)?,
            b_f: vec![1.0; hidden],
            b_i_gate: vec![0.0; hidden],
            b_c: vec![0.0; hidden],
            b_o: vec![0.0; hidden],
        })
    }

    pub fn zeros(hidden: usize, input: usize) -> Self {
        let w = || Matrix::zeros(hidden, hidden + input);
        let b = || vec![0.0; hidden];
        LstmCellParams {
            hidden,
            input,
            w_f: w(),
            w_i_gate: w(),
            w_c: w(),
            w_o: w(),
            b_f: b(),
            b_i_gate: b(),
            b_c: b(),
            b_o: b(),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.hidden, self.input)
    }

    /// 4 h (h + i) weights plus 4 h biases.
    pub fn param_count(&self) -> usize {
        4 * self.hidden * (self.hidden + self.input) + 4 * self.hidden
    }

    pub fn accumulate(&mut self, other: &Self) -> Result<()> {
        if self.hidden != other.hidden || self.input != other.input {
            return Err(Error::shape(
                "LstmCellParams::accumulate",
                format!(
                    "({}, {}) vs ({}, {})",
                    self.hidden, self.input, other.hidden, other.input
                ),
            ));
        }
        for (dst, src) in self.matrices_mut().into_iter().zip(other.matrices()) {
            for (d, s) in dst.data_mut().iter_mut().zip(src.data()) {
                *d += s;
            }
        }
        for (dst, src) in self.biases_mut().into_iter().zip(other.biases()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += s;
            }
        }
        Ok(())
    }

    /// Flattening order: w_f, w_i_gate, w_c, w_o (row-major), then
    /// b_f, b_i_gate, b_c, b_o. Model serialization and the optimizer both
    /// rely on this order.
    pub fn append_flat(&self, out: &mut Vec<f64>) {
        for m in self.matrices() {
            out.extend_from_slice(m.data());
        }
        for b in self.biases() {
            out.extend_from_slice(b);
        }
    }

    pub fn read_flat(&mut self, src: &[f64], pos: &mut usize) {
        for m in self.matrices_mut() {
            let n = m.data().len();
            m.data_mut().copy_from_slice(&src[*pos..*pos + n]);
            *pos += n;
        }
        for b in self.biases_mut() {
            let n = b.len();
            b.copy_from_slice(&src[*pos..*pos + n]);
            *pos += n;
        }
    }

    fn matrices(&self) -> [&Matrix; 4] {
        [&self.w_f, &self.w_i_gate, &self.w_c, &self.w_o]
    }

    fn matrices_mut(&mut self) -> [&mut Matrix; 4] {
        [
            &mut self.w_f,
            &mut self.w_i_gate,
            &mut self.w_c,
            &mut self.w_o,
        ]
    }

    fn biases(&self) -> [&Vec<f64>; 4] {
        [&self.b_f, &self.b_i_gate, &self.b_c, &self.b_o]
    }

    fn biases_mut(&mut self) -> [&mut Vec<f64>; 4] {
        [
            &mut self.b_f,
            &mut self.b_i_gate,
            &mut self.b_c,
            &mut self.b_o,
        ]
    }
}

/// Hidden and cell state of one LSTM cell.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl LstmState {
    pub fn zeros(hidden: usize) -> Self {
        LstmState {
            h: vec![0.0; hidden],
            c: vec![0.0; hidden],
        }
    }
}

/// Activations cached by one forward step for reuse in the backward pass.
#[derive(Debug, Clone)]
pub struct CellCache {
    pub f: Vec<f64>,
    pub i: Vec<f64>,
    pub c_bar: Vec<f64>,
    pub o: Vec<f64>,
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
    /// Concatenated `[h_prev, x_t]`, length `hidden + input`.
    pub z: Vec<f64>,
}

/// One forward step of the cell equations.
pub fn lstm_cell_forward(
    x_t: &[f64],
    prev: &LstmState,
    params: &LstmCellParams,
) -> Result<(LstmState, CellCache)> {
    if x_t.len() != params.input {
        return Err(Error::shape(
            "lstm_cell_forward",
            format!("input has length {}, cell expects {}", x_t.len(), params.input),
        ));
    }
    if prev.h.len() != params.hidden || prev.c.len() != params.hidden {
        return Err(Error::shape(
            "lstm_cell_forward",
            format!(
                "state has lengths ({}, {}), cell expects {}",
                prev.h.len(),
                prev.c.len(),
                params.hidden
            ),
        ));
    }
    let z = concat(&prev.h, x_t);
    let f = sigmoid_vec(&add_vec(&matvec(&params.w_f, &z)?, &params.b_f)?);
    let c_bar = tanh_vec(&add_vec(&matvec(&params.w_c, &z)?, &params.b_c)?);
    let i = sigmoid_vec(&add_vec(&matvec(&params.w_i_gate, &z)?, &params.b_i_gate)?);
    let c: Vec<f64> = (0..params.hidden)
        .map(|j| f[j] * prev.c[j] + i[j] * c_bar[j])
        .collect();
    let o = sigmoid_vec(&add_vec(&matvec(&params.w_o, &z)?, &params.b_o)?);
    let tanh_c = tanh_vec(&c);
    let h: Vec<f64> = (0..params.hidden).map(|j| o[j] * tanh_c[j]).collect();
    Ok((
        LstmState { h, c: c.clone() },
        CellCache {
            f,
            i,
            c_bar,
            o,
            c,
            tanh_c,
            z,
        },
    ))
}

/// Input-side gradients produced by one backward step.
#[derive(Debug, Clone)]
pub struct CellBackward {
    pub grad_x: Vec<f64>,
    pub grad_h_prev: Vec<f64>,
    pub grad_c_prev: Vec<f64>,
}

/// One reverse-mode step of the cell equations.
///
/// `grad_h` / `grad_c` are the upstream derivatives with respect to this
/// step's `h` and `c`. Parameter gradients are accumulated into
/// `grad_params`, which must mirror the cell's shapes.
pub fn lstm_cell_backward(
    grad_h: &[f64],
    grad_c: &[f64],
    cache: &CellCache,
    prev_c: &[f64],
    params: &LstmCellParams,
    grad_params: &mut LstmCellParams,
) -> Result<CellBackward> {
    let hidden = params.hidden;
    if grad_h.len() != hidden || grad_c.len() != hidden {
        return Err(Error::shape(
            "lstm_cell_backward",
            format!(
                "upstream lengths ({}, {}), cell expects {}",
                grad_h.len(),
                grad_c.len(),
                hidden
            ),
        ));
    }
    if cache.z.len() != hidden + params.input {
        return Err(Error::shape(
            "lstm_cell_backward",
            format!(
                "cache input has length {}, cell expects {}",
                cache.z.len(),
                hidden + params.input
            ),
        ));
    }
    if grad_params.hidden != hidden || grad_params.input != params.input {
        return Err(Error::shape(
            "lstm_cell_backward",
            format!(
                "grad accumulator is ({}, {}), cell is ({}, {})",
                grad_params.hidden, grad_params.input, hidden, params.input
            ),
        ));
    }

    let mut da_f = vec![0.0; hidden];
    let mut da_i = vec![0.0; hidden];
    let mut da_c = vec![0.0; hidden];
    let mut da_o = vec![0.0; hidden];
    let mut grad_c_prev = vec![0.0; hidden];
    for j in 0..hidden {
        let d_o = grad_h[j] * cache.tanh_c[j];
        // h = o . tanh(c), so dc picks up grad_h through the tanh.
        let d_c = grad_c[j] + grad_h[j] * cache.o[j] * (1.0 - cache.tanh_c[j] * cache.tanh_c[j]);
        let d_f = d_c * prev_c[j];
        let d_i = d_c * cache.c_bar[j];
        let d_c_bar = d_c * cache.i[j];
        grad_c_prev[j] = d_c * cache.f[j];
        // Pre-activation gradients through sigmoid / tanh.
        da_f[j] = d_f * cache.f[j] * (1.0 - cache.f[j]);
        da_i[j] = d_i * cache.i[j] * (1.0 - cache.i[j]);
        da_c[j] = d_c_bar * (1.0 - cache.c_bar[j] * cache.c_bar[j]);
        da_o[j] = d_o * cache.o[j] * (1.0 - cache.o[j]);
    }

    grad_params.w_f.add_assign_outer(&da_f, &cache.z);
    grad_params.w_i_gate.add_assign_outer(&da_i, &cache.z);
    grad_params.w_c.add_assign_outer(&da_c, &cache.z);
    grad_params.w_o.add_assign_outer(&da_o, &cache.z);
    for j in 0..hidden {
        grad_params.b_f[j] += da_f[j];
        grad_params.b_i_gate[j] += da_i[j];
        grad_params.b_c[j] += da_c[j];
        grad_params.b_o[j] += da_o[j];
    }

    let mut grad_z = matvec_transpose(&params.w_f, &da_f)?;
    for (g, v) in grad_z.iter_mut().zip(matvec_transpose(&params.w_i_gate, &da_i)?) {
        *g += v;
    }
    for (g, v) in grad_z.iter_mut().zip(matvec_transpose(&params.w_c, &da_c)?) {
        *g += v;
    }
    for (g, v) in grad_z.iter_mut().zip(matvec_transpose(&params.w_o, &da_o)?) {
        *g += v;
    }
    let grad_h_prev = grad_z[..hidden].to_vec();
    let grad_x = grad_z[hidden..].to_vec();
    Ok(CellBackward {
        grad_x,
        grad_h_prev,
        grad_c_prev,
    })
}

impl Matrix {
    /// `self += a bᵀ`, the weight-gradient outer product, without allocating.
    fn add_assign_outer(&mut self, a: &[f64], b: &[f64]) {
        debug_assert_eq!(self.rows(), a.len());
        debug_assert_eq!(self.cols(), b.len());
        let cols = self.cols();
        let data = self.data_mut();
        for (r, &av) in a.iter().enumerate() {
            if av == 0.0 {
                continue;
            }
            let row = &mut data[r * cols..(r + 1) * cols];
            for (d, &bv) in row.iter_mut().zip(b) {
                *d += av * bv;
            }
        }
    }
}

/// Result of unrolling one cell over a sequence.
#[derive(Debug, Clone)]
pub struct SequenceForward {
    /// Hidden state after each step, length = sequence length.
    pub hs: Vec<Vec<f64>>,
    pub final_state: LstmState,
    pub caches: Vec<CellCache>,
}

/// Iterated [`lstm_cell_forward`] with state threading: each step's new
/// state becomes the next step's prior state.
pub fn lstm_sequence_forward(
    seq: &[Vec<f64>],
    params: &LstmCellParams,
    init: &LstmState,
) -> Result<SequenceForward> {
    if seq.is_empty() {
        return Err(Error::InvalidArgument(
            "lstm_sequence_forward requires a non-empty sequence".into(),
        ));
    }
    let mut state = init.clone();
    let mut hs = Vec::with_capacity(seq.len());
    let mut caches = Vec::with_capacity(seq.len());
    for x_t in seq {
        let (next, cache) = lstm_cell_forward(x_t, &state, params)?;
        hs.push(next.h.clone());
        caches.push(cache);
        state = next;
    }
    Ok(SequenceForward {
        hs,
        final_state: state,
        caches,
    })
}

/// Gradients from unrolling the backward pass over a sequence.
#[derive(Debug, Clone)]
pub struct SequenceBackward {
    /// Gradient with respect to each input vector of the sequence.
    pub grad_inputs: Vec<Vec<f64>>,
    pub grad_params: LstmCellParams,
}

/// BPTT over a forward unroll. `upstream_hs[t]` is the loss gradient with
/// respect to the hidden state at step `t` (zero where a step's output is
/// unused). Parameter gradients accumulate over all steps.
pub fn lstm_sequence_backward(
    upstream_hs: &[Vec<f64>],
    fwd: &SequenceForward,
    init: &LstmState,
    params: &LstmCellParams,
) -> Result<SequenceBackward> {
    let steps = fwd.caches.len();
    if upstream_hs.len() != steps {
        return Err(Error::Internal(format!(
            "upstream has {} steps but caches have {}",
            upstream_hs.len(),
            steps
        )));
    }
    let hidden = params.hidden;
    let mut grad_params = params.zeros_like();
    let mut grad_inputs = vec![vec![0.0; params.input]; steps];
    let mut carry_h = vec![0.0; hidden];
    let mut carry_c = vec![0.0; hidden];
    for t in (0..steps).rev() {
        let grad_h: Vec<f64> = upstream_hs[t]
            .iter()
            .zip(&carry_h)
            .map(|(&u, &c)| u + c)
            .collect();
        let prev_c: &[f64] = if t == 0 { &init.c } else { &fwd.caches[t - 1].c };
        let back = lstm_cell_backward(
            &grad_h,
            &carry_c,
            &fwd.caches[t],
            prev_c,
            params,
            &mut grad_params,
        )?;
        grad_inputs[t] = back.grad_x;
        carry_h = back.grad_h_prev;
        carry_c = back.grad_c_prev;
    }
    Ok(SequenceBackward {
        grad_inputs,
        grad_params,
    })
}

/// A pair of cells processing the sequence in opposite directions.
#[derive(Debug, Clone, PartialEq)]
pub struct BiLstmLayerParams {
    pub forward_cell: LstmCellParams,
    pub backward_cell: LstmCellParams,
    /// When true the layer emits one `2 x hidden` vector per timestep;
    /// otherwise it emits the two directions' final states concatenated.
    pub return_sequences: bool,
}

impl BiLstmLayerParams {
    pub fn new(hidden: usize, input: usize, return_sequences: bool, rng: &mut Rng) -> Result<Self> {
        Ok(BiLstmLayerParams {
            forward_cell: LstmCellParams::new(hidden, input, rng)?,
            backward_cell: LstmCellParams::new(hidden, input, rng)?,
            return_sequences,
        })
    }

    pub fn hidden(&self) -> usize {
        self.forward_cell.hidden
    }

    pub fn input(&self) -> usize {
        self.forward_cell.input
    }

    /// Output width: the two directions concatenated.
    pub fn output_width(&self) -> usize {
        2 * self.hidden()
    }

    pub fn param_count(&self) -> usize {
        self.forward_cell.param_count() + self.backward_cell.param_count()
    }
}

/// Forward caches of both directions of a bidirectional layer.
#[derive(Debug, Clone)]
pub struct BiLstmCache {
    pub fwd: SequenceForward,
    /// Backward direction, unrolled over the reversed sequence: step `k`
    /// consumed `seq[T-1-k]`.
    pub bwd: SequenceForward,
}

/// Runs the forward cell over the sequence and the backward cell over the
/// reversed sequence. With `return_sequences` the output at each `t` is
/// `[fwd_h[t], bwd_h[T-1-t]]`; otherwise the single output is the two
/// final hidden states concatenated.
pub fn bilstm_forward(
    seq: &[Vec<f64>],
    layer: &BiLstmLayerParams,
) -> Result<(Vec<Vec<f64>>, BiLstmCache)> {
    if layer.forward_cell.hidden != layer.backward_cell.hidden
        || layer.forward_cell.input != layer.backward_cell.input
    {
        return Err(Error::shape(
            "bilstm_forward",
            format!(
                "forward cell is ({}, {}), backward cell is ({}, {})",
                layer.forward_cell.hidden,
                layer.forward_cell.input,
                layer.backward_cell.hidden,
                layer.backward_cell.input
            ),
        ));
    }
    let steps = seq.len();
    let init = LstmState::zeros(layer.hidden());
    let fwd = lstm_sequence_forward(seq, &layer.forward_cell, &init)?;
    let reversed: Vec<Vec<f64>> = seq.iter().rev().cloned().collect();
    let bwd = lstm_sequence_forward(&reversed, &layer.backward_cell, &init)?;

    let outputs = if layer.return_sequences {
        (0..steps)
            .map(|t| concat(&fwd.hs[t], &bwd.hs[steps - 1 - t]))
            .collect()
    } else {
        vec![concat(&fwd.final_state.h, &bwd.final_state.h)]
    };
    Ok((outputs, BiLstmCache { fwd, bwd }))
}

/// Gradients from a bidirectional backward pass.
#[derive(Debug, Clone)]
pub struct BiLstmBackward {
    pub grad_inputs: Vec<Vec<f64>>,
    pub grad_forward: LstmCellParams,
    pub grad_backward: LstmCellParams,
}

/// BPTT through both directions. `upstream` must have one entry per
/// timestep (return_sequences) or exactly one entry (final-state output);
/// each entry has width `2 x hidden`. Input gradients are the sum of the
/// two directions' contributions at each timestep.
pub fn bilstm_backward(
    upstream: &[Vec<f64>],
    cache: &BiLstmCache,
    layer: &BiLstmLayerParams,
) -> Result<BiLstmBackward> {
    let steps = cache.fwd.caches.len();
    let hidden = layer.hidden();
    let width = layer.output_width();
    let expected = if layer.return_sequences { steps } else { 1 };
    if upstream.len() != expected {
        return Err(Error::Internal(format!(
            "upstream has {} entries, layer caches expect {}",
            upstream.len(),
            expected
        )));
    }
    if let Some(bad) = upstream.iter().find(|u| u.len() != width) {
        return Err(Error::Internal(format!(
            "upstream entry has width {}, layer outputs width {}",
            bad.len(),
            width
        )));
    }

    let mut up_fwd = vec![vec![0.0; hidden]; steps];
    let mut up_bwd = vec![vec![0.0; hidden]; steps];
    if layer.return_sequences {
        for t in 0..steps {
            up_fwd[t] = upstream[t][..hidden].to_vec();
            // The backward direction's step k produced the output aligned
            // with original position T-1-k.
            up_bwd[steps - 1 - t] = upstream[t][hidden..].to_vec();
        }
    } else {
        up_fwd[steps - 1] = upstream[0][..hidden].to_vec();
        up_bwd[steps - 1] = upstream[0][hidden..].to_vec();
    }

    let init = LstmState::zeros(hidden);
    let back_f = lstm_sequence_backward(&up_fwd, &cache.fwd, &init, &layer.forward_cell)?;
    let back_b = lstm_sequence_backward(&up_bwd, &cache.bwd, &init, &layer.backward_cell)?;

    let mut grad_inputs = back_f.grad_inputs;
    for (t, grad) in grad_inputs.iter_mut().enumerate() {
        // back_b's step k holds the gradient for seq[T-1-k].
        for (g, &v) in grad.iter_mut().zip(&back_b.grad_inputs[steps - 1 - t]) {
            *g += v;
        }
    }
    Ok(BiLstmBackward {
        grad_inputs,
        grad_forward: back_f.grad_params,
        grad_backward: back_b.grad_params,
    })
}

/// A single cell with the same layer interface as the bidirectional layer;
/// used for width-matched unidirectional baselines.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmLayerParams {
    pub cell: LstmCellParams,
    pub return_sequences: bool,
}

impl LstmLayerParams {
    pub fn new(hidden: usize, input: usize, return_sequences: bool, rng: &mut Rng) -> Result<Self> {
        Ok(LstmLayerParams {
            cell: LstmCellParams::new(hidden, input, rng)?,
            return_sequences,
        })
    }

    pub fn output_width(&self) -> usize {
        self.cell.hidden
    }
}

pub fn lstm_layer_forward(
    seq: &[Vec<f64>],
    layer: &LstmLayerParams,
) -> Result<(Vec<Vec<f64>>, SequenceForward)> {
    let init = LstmState::zeros(layer.cell.hidden);
    let fwd = lstm_sequence_forward(seq, &layer.cell, &init)?;
    let outputs = if layer.return_sequences {
        fwd.hs.clone()
    } else {
        vec![fwd.final_state.h.clone()]
    };
    Ok((outputs, fwd))
}

pub fn lstm_layer_backward(
    upstream: &[Vec<f64>],
    cache: &SequenceForward,
    layer: &LstmLayerParams,
) -> Result<SequenceBackward> {
    let steps = cache.caches.len();
    let upstream_hs: Vec<Vec<f64>> = if layer.return_sequences {
        upstream.to_vec()
    } else {
        if upstream.len() != 1 {
            return Err(Error::Internal(format!(
                "final-state layer expects 1 upstream entry, got {}",
                upstream.len()
            )));
        }
        let mut hs = vec![vec![0.0; layer.cell.hidden]; steps];
        hs[steps - 1] = upstream[0].clone();
        hs
    };
    let init = LstmState::zeros(layer.cell.hidden);
    lstm_sequence_backward(&upstream_hs, cache, &init, &layer.cell)
}

/// `t` copies of `v`, bridging a single encoded vector to a decoder that
/// consumes a sequence.
pub fn repeat_vector(v: &[f64], t: usize) -> Result<Vec<Vec<f64>>> {
    if t == 0 {
        return Err(Error::InvalidArgument(
            "repeat_vector requires t >= 1".into(),
        ));
    }
    Ok(vec![v.to_vec(); t])
}

/// Reverse of [`repeat_vector`]: the copies all came from one vector, so
/// their gradients sum.
pub fn repeat_vector_backward(upstream: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = upstream
        .first()
        .ok_or_else(|| Error::Internal("repeat_vector_backward on empty upstream".into()))?;
    let mut out = vec![0.0; first.len()];
    for u in upstream {
        if u.len() != out.len() {
            return Err(Error::Internal(
                "repeat_vector_backward upstream entries differ in width".into(),
            ));
        }
        for (o, &v) in out.iter_mut().zip(u) {
            *o += v;
        }
    }
    Ok(out)
}

/// The same affine map `w x + b` applied independently at every timestep.
/// Linear on purpose: the loss compares raw feature values.
pub fn time_distributed_dense(
    seq: &[Vec<f64>],
    w: &Matrix,
    b: &[f64],
) -> Result<Vec<Vec<f64>>> {
    if w.rows() != b.len() {
        return Err(Error::shape(
            "time_distributed_dense",
            format!("weight is {}x{}, bias has length {}", w.rows(), w.cols(), b.len()),
        ));
    }
    seq.iter()
        .map(|x| add_vec(&matvec(w, x)?, b))
        .collect()
}

#[derive(Debug, Clone)]
pub struct TimeDistributedBackward {
    pub grad_inputs: Vec<Vec<f64>>,
    pub grad_w: Matrix,
    pub grad_b: Vec<f64>,
}

pub fn time_distributed_dense_backward(
    upstream: &[Vec<f64>],
    inputs: &[Vec<f64>],
    w: &Matrix,
) -> Result<TimeDistributedBackward> {
    if upstream.len() != inputs.len() {
        return Err(Error::Internal(format!(
            "upstream has {} steps, inputs have {}",
            upstream.len(),
            inputs.len()
        )));
    }
    let mut grad_w = Matrix::zeros(w.rows(), w.cols());
    let mut grad_b = vec![0.0; w.rows()];
    let mut grad_inputs = Vec::with_capacity(inputs.len());
    for (u, x) in upstream.iter().zip(inputs) {
        grad_w = grad_w.add(&outer(u, x))?;
        for (g, &v) in grad_b.iter_mut().zip(u) {
            *g += v;
        }
        grad_inputs.push(matvec_transpose(w, u)?);
    }
    Ok(TimeDistributedBackward {
        grad_inputs,
        grad_w,
        grad_b,
    })
}
