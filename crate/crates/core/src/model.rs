//! The sequence autoencoder: stacked recurrent encoder, bottleneck,
//! stacked recurrent decoder, and a linear per-timestep output projection.
//!
//! A window of `lookback` feature vectors is compressed into a single
//! bottleneck vector (the final state of the last encoder layer), repeated
//! back out to `lookback` steps, decoded, and projected to feature space.
//! Training minimizes the mean absolute error between the window and its
//! reconstruction, so the model only learns to reproduce the patterns it
//! was shown; unusual windows reconstruct poorly and score high.

use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read as IoRead, Write as IoWrite};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Rng};
use crate::lstm::{
    bilstm_backward, bilstm_forward, lstm_layer_backward, lstm_layer_forward, repeat_vector,
    repeat_vector_backward, time_distributed_dense, time_distributed_dense_backward,
    BiLstmCache, BiLstmLayerParams, LstmLayerParams, SequenceForward,
};

/// Whether recurrent layers read the window in both directions or one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Architecture {
    Bidirectional,
    Unidirectional,
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Architecture::Bidirectional => write!(f, "bi"),
            Architecture::Unidirectional => write!(f, "uni"),
        }
    }
}

impl FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bi" => Ok(Architecture::Bidirectional),
            "uni" => Ok(Architecture::Unidirectional),
            other => Err(Error::InvalidArgument(format!(
                "unknown architecture {other:?}; expected \"bi\" or \"uni\""
            ))),
        }
    }
}

/// Structural description of the autoencoder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelConfig {
    /// Window length in timesteps.
    pub lookback: usize,
    /// Feature count per timestep.
    pub features: usize,
    /// Hidden width of each encoder layer, outermost first.
    pub encoder_widths: Vec<usize>,
    /// Hidden width of each decoder layer, innermost first.
    pub decoder_widths: Vec<usize>,
    pub architecture: Architecture,
}

impl ModelConfig {
    /// Decoder widths default to the encoder widths mirrored, giving the
    /// hourglass shape the reconstruction objective expects.
    pub fn new(lookback: usize, features: usize, encoder_widths: Vec<usize>) -> Self {
        let decoder_widths: Vec<usize> = encoder_widths.iter().rev().copied().collect();
        ModelConfig {
            lookback,
            features,
            encoder_widths,
            decoder_widths,
            architecture: Architecture::Bidirectional,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lookback < 2 {
            return Err(Error::InvalidArgument(format!(
                "lookback must be >= 2, got {}",
                self.lookback
            )));
        }
        if self.features == 0 {
            return Err(Error::InvalidArgument("features must be >= 1".into()));
        }
        if self.encoder_widths.is_empty() || self.decoder_widths.is_empty() {
            return Err(Error::InvalidArgument(
                "encoder and decoder each need at least one layer".into(),
            ));
        }
        if let Some(&w) = self
            .encoder_widths
            .iter()
            .chain(&self.decoder_widths)
            .find(|&&w| w == 0)
        {
            return Err(Error::InvalidArgument(format!(
                "layer widths must be >= 1, got {w}"
            )));
        }
        Ok(())
    }

    /// Factor by which a layer's output is wider than its hidden size:
    /// 2 when both directions are concatenated, 1 otherwise.
    fn direction_mult(&self) -> usize {
        match self.architecture {
            Architecture::Bidirectional => 2,
            Architecture::Unidirectional => 1,
        }
    }

    /// Input width of each encoder layer, then of each decoder layer, then
    /// of the output projection. Useful for shape assertions and sizing.
    pub fn width_chain(&self) -> (Vec<usize>, Vec<usize>, usize) {
        let m = self.direction_mult();
        let mut enc_inputs = Vec::with_capacity(self.encoder_widths.len());
        let mut prev = self.features;
        for &w in &self.encoder_widths {
            enc_inputs.push(prev);
            prev = m * w;
        }
        // `prev` is now the bottleneck width.
        let mut dec_inputs = Vec::with_capacity(self.decoder_widths.len());
        for &w in &self.decoder_widths {
            dec_inputs.push(prev);
            prev = m * w;
        }
        (enc_inputs, dec_inputs, prev)
    }

    /// Width of the encoded representation handed to the decoder.
    pub fn bottleneck_width(&self) -> usize {
        self.direction_mult() * *self.encoder_widths.last().expect("validated non-empty")
    }

    /// Total scalar parameter count, in closed form from the width chain:
    /// each direction of a recurrent layer holds `4h(h + in) + 4h` values,
    /// and the projection holds `features * in + features`.
    pub fn param_count(&self) -> usize {
        let m = self.direction_mult();
        let (enc_inputs, dec_inputs, proj_input) = self.width_chain();
        let cell = |h: usize, input: usize| 4 * h * (h + input) + 4 * h;
        let mut total = 0;
        for (&h, &input) in self.encoder_widths.iter().zip(&enc_inputs) {
            total += m * cell(h, input);
        }
        for (&h, &input) in self.decoder_widths.iter().zip(&dec_inputs) {
            total += m * cell(h, input);
        }
        total + self.features * proj_input + self.features
    }
}

/// One recurrent layer of either direction policy.
#[derive(Debug, Clone, PartialEq)]
pub enum SeqLayer {
    Bi(BiLstmLayerParams),
    Uni(LstmLayerParams),
}

/// Forward activations of one [`SeqLayer`], kept for the backward pass.
#[derive(Debug, Clone)]
pub enum SeqLayerCache {
    Bi(BiLstmCache),
    Uni(SequenceForward),
}

impl SeqLayer {
    fn new(
        arch: Architecture,
        hidden: usize,
        input: usize,
        return_sequences: bool,
        rng: &mut Rng,
    ) -> Result<Self> {
        Ok(match arch {
            Architecture::Bidirectional => {
                SeqLayer::Bi(BiLstmLayerParams::new(hidden, input, return_sequences, rng)?)
            }
            Architecture::Unidirectional => {
                SeqLayer::Uni(LstmLayerParams::new(hidden, input, return_sequences, rng)?)
            }
        })
    }

    fn zeros_like(&self) -> Self {
        match self {
            SeqLayer::Bi(l) => SeqLayer::Bi(BiLstmLayerParams {
                forward_cell: l.forward_cell.zeros_like(),
                backward_cell: l.backward_cell.zeros_like(),
                return_sequences: l.return_sequences,
            }),
            SeqLayer::Uni(l) => SeqLayer::Uni(LstmLayerParams {
                cell: l.cell.zeros_like(),
                return_sequences: l.return_sequences,
            }),
        }
    }

    pub fn output_width(&self) -> usize {
        match self {
            SeqLayer::Bi(l) => l.output_width(),
            SeqLayer::Uni(l) => l.output_width(),
        }
    }

    pub fn input_width(&self) -> usize {
        match self {
            SeqLayer::Bi(l) => l.input(),
            SeqLayer::Uni(l) => l.cell.input,
        }
    }

    pub fn param_count(&self) -> usize {
        match self {
            SeqLayer::Bi(l) => l.param_count(),
            SeqLayer::Uni(l) => l.cell.param_count(),
        }
    }

    fn forward(&self, seq: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, SeqLayerCache)> {
        match self {
            SeqLayer::Bi(l) => {
                let (out, cache) = bilstm_forward(seq, l)?;
                Ok((out, SeqLayerCache::Bi(cache)))
            }
            SeqLayer::Uni(l) => {
                let (out, cache) = lstm_layer_forward(seq, l)?;
                Ok((out, SeqLayerCache::Uni(cache)))
            }
        }
    }

    /// Returns (grad_inputs, parameter gradients shaped like `self`).
    fn backward(&self, upstream: &[Vec<f64>], cache: &SeqLayerCache) -> Result<(Vec<Vec<f64>>, SeqLayer)> {
        match (self, cache) {
            (SeqLayer::Bi(l), SeqLayerCache::Bi(c)) => {
                let back = bilstm_backward(upstream, c, l)?;
                Ok((
                    back.grad_inputs,
                    SeqLayer::Bi(BiLstmLayerParams {
                        forward_cell: back.grad_forward,
                        backward_cell: back.grad_backward,
                        return_sequences: l.return_sequences,
                    }),
                ))
            }
            (SeqLayer::Uni(l), SeqLayerCache::Uni(c)) => {
                let back = lstm_layer_backward(upstream, c, l)?;
                Ok((
                    back.grad_inputs,
                    SeqLayer::Uni(LstmLayerParams {
                        cell: back.grad_params,
                        return_sequences: l.return_sequences,
                    }),
                ))
            }
            _ => Err(Error::Internal(
                "layer and cache disagree on direction policy".into(),
            )),
        }
    }

    fn accumulate(&mut self, other: &SeqLayer) -> Result<()> {
        match (self, other) {
            (SeqLayer::Bi(a), SeqLayer::Bi(b)) => {
                a.forward_cell.accumulate(&b.forward_cell)?;
                a.backward_cell.accumulate(&b.backward_cell)
            }
            (SeqLayer::Uni(a), SeqLayer::Uni(b)) => a.cell.accumulate(&b.cell),
            _ => Err(Error::Internal(
                "cannot accumulate gradients across direction policies".into(),
            )),
        }
    }

    fn append_flat(&self, out: &mut Vec<f64>) {
        match self {
            SeqLayer::Bi(l) => {
                l.forward_cell.append_flat(out);
                l.backward_cell.append_flat(out);
            }
            SeqLayer::Uni(l) => l.cell.append_flat(out),
        }
    }

    fn read_flat(&mut self, src: &[f64], pos: &mut usize) {
        match self {
            SeqLayer::Bi(l) => {
                l.forward_cell.read_flat(src, pos);
                l.backward_cell.read_flat(src, pos);
            }
            SeqLayer::Uni(l) => l.cell.read_flat(src, pos),
        }
    }
}

/// The full parameter set of an autoencoder. Gradient accumulators reuse
/// this type, since they mirror the parameter shapes exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub config: ModelConfig,
    pub encoder: Vec<SeqLayer>,
    pub decoder: Vec<SeqLayer>,
    /// Output projection, `features x (last decoder output width)`.
    pub proj_w: Matrix,
    pub proj_b: Vec<f64>,
}

/// Per-stage activations of one window's forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub encoder: Vec<SeqLayerCache>,
    pub decoder: Vec<SeqLayerCache>,
    /// Output sequence of the last decoder layer; input to the projection.
    pub proj_input: Vec<Vec<f64>>,
}

/// Seeded construction: two builds with the same config and seed are
/// parameter-for-parameter identical.
pub fn build_model(config: &ModelConfig, seed: u64) -> Result<ModelParams> {
    config.validate()?;
    let mut rng = Rng::new(seed);
    let (enc_inputs, dec_inputs, proj_input_width) = config.width_chain();
    let arch = config.architecture;

    let n_enc = config.encoder_widths.len();
    let mut encoder = Vec::with_capacity(n_enc);
    for (k, (&h, &input)) in config.encoder_widths.iter().zip(&enc_inputs).enumerate() {
        // Only the innermost encoder layer collapses to its final state.
        let return_sequences = k + 1 < n_enc;
        encoder.push(SeqLayer::new(arch, h, input, return_sequences, &mut rng)?);
    }
    let mut decoder = Vec::with_capacity(config.decoder_widths.len());
    for (&h, &input) in config.decoder_widths.iter().zip(&dec_inputs) {
        decoder.push(SeqLayer::new(arch, h, input, true, &mut rng)?);
    }
    let proj_w = crate::linalg::glorot_uniform(&mut rng, proj_input_width, config.features)?;
    let proj_b = vec![0.0; config.features];
    Ok(ModelParams {
        config: config.clone(),
        encoder,
        decoder,
        proj_w,
        proj_b,
    })
}

impl ModelParams {
    /// Same shapes, all values zero: a fresh gradient accumulator.
    pub fn zeros_like(&self) -> ModelParams {
        ModelParams {
            config: self.config.clone(),
            encoder: self.encoder.iter().map(SeqLayer::zeros_like).collect(),
            decoder: self.decoder.iter().map(SeqLayer::zeros_like).collect(),
            proj_w: Matrix::zeros(self.proj_w.rows(), self.proj_w.cols()),
            proj_b: vec![0.0; self.proj_b.len()],
        }
    }

    pub fn param_count(&self) -> usize {
        self.encoder
            .iter()
            .chain(&self.decoder)
            .map(SeqLayer::param_count)
            .sum::<usize>()
            + self.proj_w.rows() * self.proj_w.cols()
            + self.proj_b.len()
    }

    /// All parameters as one vector, in a fixed documented order: encoder
    /// layers outermost-first, then decoder layers, then projection weight
    /// (row-major) and bias. Within a bidirectional layer the forward cell
    /// precedes the backward cell; within a cell, w_f, w_i_gate, w_c, w_o,
    /// then the biases in the same gate order.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for layer in self.encoder.iter().chain(&self.decoder) {
            layer.append_flat(&mut out);
        }
        out.extend_from_slice(self.proj_w.data());
        out.extend_from_slice(&self.proj_b);
        out
    }

    /// Inverse of [`flatten`](Self::flatten).
    pub fn assign_from_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::shape(
                "assign_from_flat",
                format!(
                    "model has {} parameters, vector has {}",
                    self.param_count(),
                    flat.len()
                ),
            ));
        }
        let mut pos = 0;
        for layer in self.encoder.iter_mut().chain(self.decoder.iter_mut()) {
            layer.read_flat(flat, &mut pos);
        }
        let n = self.proj_w.data().len();
        self.proj_w.data_mut().copy_from_slice(&flat[pos..pos + n]);
        pos += n;
        let nb = self.proj_b.len();
        self.proj_b.copy_from_slice(&flat[pos..pos + nb]);
        Ok(())
    }

    /// Element-wise `self += other`; both must share one structure.
    pub fn accumulate(&mut self, other: &ModelParams) -> Result<()> {
        if self.config != other.config {
            return Err(Error::Internal(
                "cannot accumulate gradients across model configs".into(),
            ));
        }
        for (a, b) in self.encoder.iter_mut().zip(&other.encoder) {
            a.accumulate(b)?;
        }
        for (a, b) in self.decoder.iter_mut().zip(&other.decoder) {
            a.accumulate(b)?;
        }
        self.proj_w = self.proj_w.add(&other.proj_w)?;
        for (a, b) in self.proj_b.iter_mut().zip(&other.proj_b) {
            *a += b;
        }
        Ok(())
    }

    /// Reconstructs one window. `window` must be `lookback` vectors of
    /// `features` values; the output has the same shape.
    pub fn forward(&self, window: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, ForwardCache)> {
        if window.len() != self.config.lookback {
            return Err(Error::shape(
                "model forward",
                format!(
                    "window has {} steps, model expects {}",
                    window.len(),
                    self.config.lookback
                ),
            ));
        }
        if let Some(bad) = window.iter().find(|r| r.len() != self.config.features) {
            return Err(Error::shape(
                "model forward",
                format!(
                    "window row has {} features, model expects {}",
                    bad.len(),
                    self.config.features
                ),
            ));
        }

        let mut seq: Vec<Vec<f64>> = window.to_vec();
        let mut enc_caches = Vec::with_capacity(self.encoder.len());
        for layer in &self.encoder {
            let (out, cache) = layer.forward(&seq)?;
            enc_caches.push(cache);
            seq = out;
        }
        // The innermost encoder layer emitted a single bottleneck vector.
        debug_assert_eq!(seq.len(), 1);
        let repeated = repeat_vector(&seq[0], self.config.lookback)?;

        let mut seq = repeated;
        let mut dec_caches = Vec::with_capacity(self.decoder.len());
        for layer in &self.decoder {
            let (out, cache) = layer.forward(&seq)?;
            dec_caches.push(cache);
            seq = out;
        }
        let output = time_distributed_dense(&seq, &self.proj_w, &self.proj_b)?;
        Ok((
            output,
            ForwardCache {
                encoder: enc_caches,
                decoder: dec_caches,
                proj_input: seq,
            },
        ))
    }

    /// Full-model reverse pass from an arbitrary gradient on the output
    /// sequence. Returns parameter gradients shaped like `self`.
    pub fn backward_from_output_grad(
        &self,
        grad_output: &[Vec<f64>],
        cache: &ForwardCache,
    ) -> Result<ModelParams> {
        let mut grads = self.zeros_like();
        let proj_back =
            time_distributed_dense_backward(grad_output, &cache.proj_input, &self.proj_w)?;
        grads.proj_w = proj_back.grad_w;
        grads.proj_b = proj_back.grad_b;

        let mut upstream = proj_back.grad_inputs;
        for ((layer, layer_cache), grad_slot) in self
            .decoder
            .iter()
            .zip(&cache.decoder)
            .zip(grads.decoder.iter_mut())
            .rev()
        {
            let (grad_inputs, layer_grads) = layer.backward(&upstream, layer_cache)?;
            *grad_slot = layer_grads;
            upstream = grad_inputs;
        }

        // All decoder inputs were copies of the one bottleneck vector.
        let grad_bottleneck = repeat_vector_backward(&upstream)?;
        let mut upstream = vec![grad_bottleneck];
        for ((layer, layer_cache), grad_slot) in self
            .encoder
            .iter()
            .zip(&cache.encoder)
            .zip(grads.encoder.iter_mut())
            .rev()
        {
            let (grad_inputs, layer_grads) = layer.backward(&upstream, layer_cache)?;
            *grad_slot = layer_grads;
            upstream = grad_inputs;
        }
        Ok(grads)
    }

    /// Gradients of the mean-absolute-error loss for one window.
    pub fn backward(
        &self,
        window: &[Vec<f64>],
        output: &[Vec<f64>],
        cache: &ForwardCache,
    ) -> Result<ModelParams> {
        let grad_output = mae_loss_grad(output, window)?;
        self.backward_from_output_grad(&grad_output, cache)
    }
}

/// Mean absolute error between a reconstruction and its target, averaged
/// over every scalar entry of the window.
pub fn mae_loss(output: &[Vec<f64>], target: &[Vec<f64>]) -> Result<f64> {
    let n = checked_entry_count(output, target)?;
    let sum: f64 = output
        .iter()
        .zip(target)
        .flat_map(|(o, t)| o.iter().zip(t).map(|(a, b)| (a - b).abs()))
        .sum();
    Ok(sum / n as f64)
}

/// Subgradient of [`mae_loss`] with respect to the reconstruction:
/// `sign(output - target) / n`, with `sign(0) = 0`.
pub fn mae_loss_grad(output: &[Vec<f64>], target: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = checked_entry_count(output, target)? as f64;
    Ok(output
        .iter()
        .zip(target)
        .map(|(o, t)| {
            o.iter()
                .zip(t)
                .map(|(a, b)| {
                    let d = a - b;
                    if d > 0.0 {
                        1.0 / n
                    } else if d < 0.0 {
                        -1.0 / n
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect())
}

fn checked_entry_count(output: &[Vec<f64>], target: &[Vec<f64>]) -> Result<usize> {
    if output.len() != target.len()
        || output
            .iter()
            .zip(target)
            .any(|(o, t)| o.len() != t.len())
    {
        return Err(Error::shape(
            "mae_loss",
            "reconstruction and target shapes differ",
        ));
    }
    let n: usize = output.iter().map(Vec::len).sum();
    if n == 0 {
        return Err(Error::InvalidArgument("mae_loss over zero entries".into()));
    }
    Ok(n)
}

// --- model file format -----------------------------------------------------
//
// Little-endian throughout:
//   magic   4 bytes  "TSAE"
//   version u32      currently 1
//   lookback u32, features u32, architecture u8 (0 = bi, 1 = uni)
//   n_enc u32, then n_enc * u32 encoder widths
//   n_dec u32, then n_dec * u32 decoder widths
//   count u64        total f64 parameters that follow
//   count * f64      parameters in flatten() order

const MODEL_MAGIC: [u8; 4] = *b"TSAE";
const MODEL_VERSION: u32 = 1;

pub fn save_model(path: &Path, params: &ModelParams) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&MODEL_MAGIC)?;
    w.write_all(&MODEL_VERSION.to_le_bytes())?;
    let cfg = &params.config;
    w.write_all(&(cfg.lookback as u32).to_le_bytes())?;
    w.write_all(&(cfg.features as u32).to_le_bytes())?;
    let arch_byte: u8 = match cfg.architecture {
        Architecture::Bidirectional => 0,
        Architecture::Unidirectional => 1,
    };
    w.write_all(&[arch_byte])?;
    for widths in [&cfg.encoder_widths, &cfg.decoder_widths] {
        w.write_all(&(widths.len() as u32).to_le_bytes())?;
        for &width in widths.iter() {
            w.write_all(&(width as u32).to_le_bytes())?;
        }
    }
    let flat = params.flatten();
    w.write_all(&(flat.len() as u64).to_le_bytes())?;
    for v in &flat {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<ModelParams> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    read_exact(&mut r, &mut magic, "magic")?;
    if magic != MODEL_MAGIC {
        return Err(Error::ModelBadMagic);
    }
    let version = read_u32(&mut r, "version")?;
    if version != MODEL_VERSION {
        return Err(Error::ModelVersion {
            found: version,
            supported: MODEL_VERSION,
        });
    }
    let lookback = read_u32(&mut r, "lookback")? as usize;
    let features = read_u32(&mut r, "features")? as usize;
    let mut arch_byte = [0u8; 1];
    read_exact(&mut r, &mut arch_byte, "architecture")?;
    let architecture = match arch_byte[0] {
        0 => Architecture::Bidirectional,
        1 => Architecture::Unidirectional,
        other => {
            return Err(Error::ModelInconsistent(format!(
                "unknown architecture byte {other}"
            )))
        }
    };
    let mut read_widths = |label: &'static str| -> Result<Vec<usize>> {
        let n = read_u32(&mut r, label)? as usize;
        if n > 64 {
            return Err(Error::ModelInconsistent(format!(
                "{label} claims {n} layers"
            )));
        }
        (0..n).map(|_| Ok(read_u32(&mut r, label)? as usize)).collect()
    };
    let encoder_widths = read_widths("encoder widths")?;
    let decoder_widths = read_widths("decoder widths")?;
    let config = ModelConfig {
        lookback,
        features,
        encoder_widths,
        decoder_widths,
        architecture,
    };
    config
        .validate()
        .map_err(|e| Error::ModelInconsistent(e.to_string()))?;

    let count = read_u64(&mut r, "parameter count")? as usize;
    if count != config.param_count() {
        return Err(Error::ModelInconsistent(format!(
            "file holds {} parameters but the config implies {}",
            count,
            config.param_count()
        )));
    }
    let mut flat = Vec::with_capacity(count);
    let mut buf = [0u8; 8];
    for _ in 0..count {
        read_exact(&mut r, &mut buf, "parameters")?;
        let v = f64::from_le_bytes(buf);
        if !v.is_finite() {
            return Err(Error::ModelInconsistent(
                "file contains a non-finite parameter".into(),
            ));
        }
        flat.push(v);
    }
    // Build with arbitrary seed, then overwrite every parameter.
    let mut params = build_model(&config, 0)?;
    params.assign_from_flat(&flat)?;
    Ok(params)
}

fn read_exact(r: &mut impl IoRead, buf: &mut [u8], context: &'static str) -> Result<()> {
    r.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            Error::ModelTruncated {
                context: context.to_string(),
            }
        } else {
            Error::Io(e)
        }
    })
}

fn read_u32(r: &mut impl IoRead, context: &'static str) -> Result<u32> {
    let mut buf = [0u8; 4];
    read_exact(r, &mut buf, context)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64(r: &mut impl IoRead, context: &'static str) -> Result<u64> {
    let mut buf = [0u8; 8];
    read_exact(r, &mut buf, context)?;
    Ok(u64::from_le_bytes(buf))
}
