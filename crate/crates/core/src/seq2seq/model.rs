//! Encoder–decoder network: weights, teacher-forced loss with its gradient,
//! and greedy inference.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;

use super::lstm::{LstmLayerParams, StepCache};
use super::{Initialization, TrainingConfig};
use crate::charcodec::{self, Alphabet, CodecError, UnknownPolicy, END, PAD, START};
use crate::par::Execution;

/// All trainable tensors. Also used as the gradient accumulator.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    pub encoder: Vec<LstmLayerParams>,
    pub decoder: Vec<LstmLayerParams>,
    /// `hidden_dim × target_alphabet_size`
    pub projection: Array2<f64>,
    pub projection_bias: Array1<f64>,
}

impl Weights {
    pub fn zeros(source_size: usize, target_size: usize, hidden_dim: usize, layers: usize) -> Self {
        let stack = |input: usize| {
            (0..layers)
                .map(|l| {
                    LstmLayerParams::zeros(if l == 0 { input } else { hidden_dim }, hidden_dim)
                })
                .collect()
        };
        Self {
            encoder: stack(source_size),
            decoder: stack(target_size),
            projection: Array2::zeros((hidden_dim, target_size)),
            projection_bias: Array1::zeros(target_size),
        }
    }

    /// Every entry uniform in `[-scale, scale)`.
    pub fn uniform<R: Rng>(
        source_size: usize,
        target_size: usize,
        hidden_dim: usize,
        layers: usize,
        scale: f64,
        rng: &mut R,
    ) -> Self {
        let mut w = Self::zeros(source_size, target_size, hidden_dim, layers);
        for t in w.tensors_mut() {
            t.iter_mut().for_each(|x| *x = rng.gen_range(-scale..scale));
        }
        w
    }

    /// Glorot-uniform input and projection matrices, orthogonal recurrent
    /// matrices, zero biases except a forget-gate bias of 1.
    pub fn keras<R: Rng>(
        source_size: usize,
        target_size: usize,
        hidden_dim: usize,
        layers: usize,
        rng: &mut R,
    ) -> Self {
        let mut w = Self::zeros(source_size, target_size, hidden_dim, layers);
        for layer in w.encoder.iter_mut().chain(w.decoder.iter_mut()) {
            glorot_uniform(&mut layer.w_input, rng);
            orthogonal_rows(&mut layer.w_recurrent, rng);
            layer
                .bias
                .slice_mut(ndarray::s![hidden_dim..2 * hidden_dim])
                .fill(1.0);
        }
        glorot_uniform(&mut w.projection, rng);
        w
    }

    pub fn initialized<R: Rng>(
        source_size: usize,
        target_size: usize,
        hidden_dim: usize,
        layers: usize,
        init: Initialization,
        rng: &mut R,
    ) -> Self {
        match init {
            Initialization::Keras => Self::keras(source_size, target_size, hidden_dim, layers, rng),
            Initialization::Uniform { scale } => {
                Self::uniform(source_size, target_size, hidden_dim, layers, scale, rng)
            }
        }
    }

    pub fn zeros_like(&self) -> Self {
        let hd = self.projection.nrows();
        Self::zeros(
            self.encoder[0].input_dim(),
            self.projection.ncols(),
            hd,
            self.encoder.len(),
        )
    }

    /// Flat views of every tensor in a fixed order: encoder layers, decoder
    /// layers (each input, recurrent, bias), projection, projection bias.
    pub fn tensors(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::new();
        for layer in self.encoder.iter().chain(&self.decoder) {
            out.extend(layer.tensors());
        }
        out.push(self.projection.as_slice().expect("standard layout"));
        out.push(self.projection_bias.as_slice().expect("standard layout"));
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        for layer in self.encoder.iter_mut().chain(self.decoder.iter_mut()) {
            out.extend(layer.tensors_mut());
        }
        out.push(self.projection.as_slice_mut().expect("standard layout"));
        out.push(
            self.projection_bias
                .as_slice_mut()
                .expect("standard layout"),
        );
        out
    }

    pub fn shapes(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for layer in self.encoder.iter().chain(&self.decoder) {
            out.extend(layer.shapes());
        }
        out.push(self.projection.shape().to_vec());
        out.push(self.projection_bias.shape().to_vec());
        out
    }

    pub fn num_parameters(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }
}

fn glorot_uniform<R: Rng>(m: &mut Array2<f64>, rng: &mut R) {
    let limit = (6.0 / (m.nrows() + m.ncols()) as f64).sqrt();
    m.iter_mut().for_each(|v| *v = rng.gen_range(-limit..limit));
}

/// Gaussian rows orthonormalized by Gram–Schmidt; needs `rows <= cols`.
fn orthogonal_rows<R: Rng>(m: &mut Array2<f64>, rng: &mut R) {
    let (rows, cols) = m.dim();
    debug_assert!(rows <= cols);
    for i in 0..rows {
        let mut v = Array1::from_shape_fn(cols, |_| rng.sample::<f64, _>(StandardNormal));
        for j in 0..i {
            let prev = m.row(j);
            let d = v.dot(&prev);
            v.scaled_add(-d, &prev);
        }
        let norm = v.dot(&v).sqrt();
        m.row_mut(i).assign(&(v / norm));
    }
}

/// A trained (or freshly initialized) model with everything needed to
/// encode, decode and reproduce it.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub weights: Weights,
    pub source_alphabet: Alphabet,
    pub target_alphabet: Alphabet,
    pub max_len: usize,
    pub config: TrainingConfig,
}

impl ModelParams {
    pub fn hidden_dim(&self) -> usize {
        self.weights.projection.nrows()
    }

    pub fn num_layers(&self) -> usize {
        self.weights.encoder.len()
    }
}

/// Final `(h, c)` of every encoder layer.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderContext {
    pub layers: Vec<(Array1<f64>, Array1<f64>)>,
}

/// Per-layer decoder `(h, c)` at one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderState {
    pub layers: Vec<(Array1<f64>, Array1<f64>)>,
}

impl From<EncoderContext> for DecoderState {
    fn from(ctx: EncoderContext) -> Self {
        Self { layers: ctx.layers }
    }
}

fn one_hot_rows(indices: impl Iterator<Item = usize>, rows: usize, width: usize) -> Array2<f64> {
    let mut m = Array2::zeros((rows, width));
    for (r, i) in indices.enumerate() {
        m[[r, i]] = 1.0;
    }
    m
}

fn softmax_rows(logits: &mut Array2<f64>) {
    for mut row in logits.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let z = row.sum();
        row.mapv_inplace(|v| v / z);
    }
}

/// Lowest index among equal maxima.
pub(crate) fn argmax(row: ndarray::ArrayView1<f64>) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

type Stack = Vec<(Array2<f64>, Array2<f64>)>;

fn run_stack(
    layers: &[LstmLayerParams],
    input: ArrayView2<f64>,
    state: &mut Stack,
    caches: Option<&mut Vec<Vec<StepCache>>>,
) {
    let keep = caches.is_some();
    let mut step_caches = Vec::new();
    let mut x = input.to_owned();
    for (layer, (h, c)) in layers.iter().zip(state.iter_mut()) {
        let (h2, c2, cache) = layer.forward_cached(x.view(), h.view(), c.view(), keep);
        *h = h2;
        *c = c2;
        x = h.clone();
        step_caches.extend(cache);
    }
    if let Some(caches) = caches {
        caches.push(step_caches);
    }
}

fn zero_stack(layers: usize, rows: usize, hidden: usize) -> Stack {
    (0..layers)
        .map(|_| (Array2::zeros((rows, hidden)), Array2::zeros((rows, hidden))))
        .collect()
}

/// A batch of encoded training pairs: `source` is `rows × max_len`,
/// `target` is `rows × (max_len + 2)` framed by START/END.
#[derive(Debug, Clone)]
pub struct Batch {
    pub source: Vec<Vec<usize>>,
    pub target: Vec<Vec<usize>>,
}

impl Batch {
    pub fn rows(&self) -> usize {
        self.source.len()
    }
}

/// Sums over one batch; divide by `positions` for the mean loss.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BatchStats {
    pub loss_sum: f64,
    pub positions: usize,
    pub correct_positions: usize,
    pub correct_sequences: usize,
    pub sequences: usize,
}

impl BatchStats {
    pub fn mean_loss(&self) -> f64 {
        if self.positions == 0 {
            0.0
        } else {
            self.loss_sum / self.positions as f64
        }
    }

    pub(crate) fn merge(&mut self, other: &BatchStats) {
        self.loss_sum += other.loss_sum;
        self.positions += other.positions;
        self.correct_positions += other.correct_positions;
        self.correct_sequences += other.correct_sequences;
        self.sequences += other.sequences;
    }
}

/// Teacher-forced mean cross-entropy over non-PAD target positions. With
/// `grads`, the gradient of that mean is accumulated into it.
pub fn batch_loss(weights: &Weights, batch: &Batch, grads: Option<&mut Weights>) -> BatchStats {
    let rows = batch.rows();
    let hidden = weights.projection.nrows();
    let layers = weights.encoder.len();
    let src_size = weights.encoder[0].input_dim();
    let tgt_size = weights.projection.ncols();
    let src_len = batch.source.first().map_or(0, Vec::len);
    let dec_len = batch
        .target
        .first()
        .map_or(0, |t| t.len().saturating_sub(1));
    let want_grad = grads.is_some();

    let mut enc_caches = Vec::new();
    let mut state = zero_stack(layers, rows, hidden);
    for t in 0..src_len {
        let x = one_hot_rows(batch.source.iter().map(|s| s[t]), rows, src_size);
        run_stack(
            &weights.encoder,
            x.view(),
            &mut state,
            want_grad.then_some(&mut enc_caches),
        );
    }

    let positions: usize = batch
        .target
        .iter()
        .map(|t| t[1..].iter().filter(|&&i| i != PAD).count())
        .sum();
    let scale = if positions == 0 {
        0.0
    } else {
        1.0 / positions as f64
    };

    let mut stats = BatchStats {
        positions,
        sequences: rows,
        ..Default::default()
    };
    let mut seq_ok = vec![true; rows];
    let mut dec_caches = Vec::new();
    let mut tops = Vec::new();
    let mut dlogits_all = Vec::new();
    for t in 0..dec_len {
        let x = one_hot_rows(batch.target.iter().map(|y| y[t]), rows, tgt_size);
        run_stack(
            &weights.decoder,
            x.view(),
            &mut state,
            want_grad.then_some(&mut dec_caches),
        );
        let top = &state[layers - 1].0;
        let mut probs = top.dot(&weights.projection) + &weights.projection_bias;
        softmax_rows(&mut probs);
        for (r, y) in batch.target.iter().enumerate() {
            let gold = y[t + 1];
            if gold == PAD {
                probs.row_mut(r).fill(0.0);
                continue;
            }
            stats.loss_sum -= probs[[r, gold]].ln();
            if argmax(probs.row(r)) == gold {
                stats.correct_positions += 1;
            } else {
                seq_ok[r] = false;
            }
            // softmax + cross-entropy: d/dlogits = p - onehot
            probs[[r, gold]] -= 1.0;
        }
        if want_grad {
            probs *= scale;
            tops.push(top.clone());
            dlogits_all.push(probs);
        }
    }
    stats.correct_sequences = seq_ok.iter().filter(|ok| **ok).count();

    let Some(grads) = grads else {
        return stats;
    };

    let mut dh: Vec<Array2<f64>> = (0..layers).map(|_| Array2::zeros((rows, hidden))).collect();
    let mut dc: Vec<Array2<f64>> = dh.clone();
    for t in (0..dec_len).rev() {
        let dlogits = &dlogits_all[t];
        grads.projection += &tops[t].t().dot(dlogits);
        grads.projection_bias += &dlogits.sum_axis(Axis(0));
        let mut from_above = dlogits.dot(&weights.projection.t());
        for l in (0..layers).rev() {
            let dh_total = &dh[l] + &from_above;
            let (d_in, dh_prev, dc_prev) = weights.decoder[l].backward(
                &dec_caches[t][l],
                &dh_total,
                &dc[l],
                &mut grads.decoder[l],
                l > 0,
            );
            dh[l] = dh_prev;
            dc[l] = dc_prev;
            if let Some(d_in) = d_in {
                from_above = d_in;
            }
        }
    }
    for t in (0..src_len).rev() {
        let mut from_above: Option<Array2<f64>> = None;
        for l in (0..layers).rev() {
            let dh_total = match &from_above {
                Some(d) => &dh[l] + d,
                None => dh[l].clone(),
            };
            let (d_in, dh_prev, dc_prev) = weights.encoder[l].backward(
                &enc_caches[t][l],
                &dh_total,
                &dc[l],
                &mut grads.encoder[l],
                l > 0,
            );
            dh[l] = dh_prev;
            dc[l] = dc_prev;
            from_above = d_in;
        }
    }
    stats
}

/// Run the encoder left to right over every position of a one-hot source
/// matrix (`max_len × source_alphabet_size`).
pub fn encode_sequence(x: ArrayView2<f64>, params: &ModelParams) -> EncoderContext {
    let w = &params.weights;
    let mut state = zero_stack(w.encoder.len(), 1, params.hidden_dim());
    for row in x.rows() {
        run_stack(&w.encoder, row.insert_axis(Axis(0)), &mut state, None);
    }
    EncoderContext {
        layers: state
            .into_iter()
            .map(|(h, c)| (h.row(0).to_owned(), c.row(0).to_owned()))
            .collect(),
    }
}

/// One decoder step: probabilities over the target alphabet for the next
/// symbol, and the advanced state.
pub fn decode_step(
    prev_symbol: usize,
    state: &DecoderState,
    params: &ModelParams,
) -> (Array1<f64>, DecoderState) {
    let w = &params.weights;
    let mut stack: Stack = state
        .layers
        .iter()
        .map(|(h, c)| {
            (
                h.view().insert_axis(Axis(0)).to_owned(),
                c.view().insert_axis(Axis(0)).to_owned(),
            )
        })
        .collect();
    let x = one_hot_rows(
        std::iter::once(prev_symbol),
        1,
        params.target_alphabet.len(),
    );
    run_stack(&w.decoder, x.view(), &mut stack, None);
    let top = &stack[stack.len() - 1].0;
    let mut probs = top.dot(&w.projection) + &w.projection_bias;
    softmax_rows(&mut probs);
    let next = DecoderState {
        layers: stack
            .into_iter()
            .map(|(h, c)| (h.row(0).to_owned(), c.row(0).to_owned()))
            .collect(),
    };
    (probs.row(0).to_owned(), next)
}

/// Greedy decoding of a (pre-normalized) word. Stops at END, or after
/// `max_len` characters.
pub fn infer(params: &ModelParams, w: &str) -> Result<String, CodecError> {
    infer_with(params, w, UnknownPolicy::Error)
}

pub fn infer_with(
    params: &ModelParams,
    w: &str,
    policy: UnknownPolicy,
) -> Result<String, CodecError> {
    let encoded = charcodec::encode_with(w, &params.source_alphabet, params.max_len, policy)?;
    let x = charcodec::to_one_hot(&encoded, &params.source_alphabet);
    let mut state = DecoderState::from(encode_sequence(x.view(), params));
    let mut prev = START;
    let mut out = Vec::with_capacity(params.max_len);
    while out.len() < params.max_len {
        let (probs, next) = decode_step(prev, &state, params);
        let symbol = argmax(probs.view());
        if symbol == END || symbol == PAD {
            break;
        }
        out.push(symbol);
        state = next;
        prev = symbol;
    }
    charcodec::decode(&out, &params.target_alphabet)
}

/// [`infer`] over many words, results in input order.
pub fn infer_many<S: AsRef<str> + Sync>(
    params: &ModelParams,
    words: &[S],
    policy: UnknownPolicy,
    exec: Execution,
) -> Vec<Result<String, CodecError>> {
    exec.map(words, |w| infer_with(params, w.as_ref(), policy))
}
