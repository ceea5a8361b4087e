//! A single LSTM layer, batched over rows, with its hand-written backward pass.
//!
//! Gate columns in the pre-activation are laid out `[input | forget | cell | output]`,
//! each `hidden_dim` wide.

use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use rand::Rng;

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmLayerParams {
    /// `input_dim × 4·hidden_dim`
    pub w_input: Array2<f64>,
    /// `hidden_dim × 4·hidden_dim`
    pub w_recurrent: Array2<f64>,
    /// `4·hidden_dim`
    pub bias: Array1<f64>,
}

/// Everything the backward pass needs from one forward step.
#[derive(Debug, Clone)]
pub(crate) struct StepCache {
    input: Array2<f64>,
    h_prev: Array2<f64>,
    c_prev: Array2<f64>,
    /// Activated gates, same layout as the pre-activation.
    gates: Array2<f64>,
    tanh_c: Array2<f64>,
}

impl LstmLayerParams {
    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        Self {
            w_input: Array2::zeros((input_dim, 4 * hidden_dim)),
            w_recurrent: Array2::zeros((hidden_dim, 4 * hidden_dim)),
            bias: Array1::zeros(4 * hidden_dim),
        }
    }

    pub fn uniform<R: Rng>(input_dim: usize, hidden_dim: usize, scale: f64, rng: &mut R) -> Self {
        let mut p = Self::zeros(input_dim, hidden_dim);
        for v in p.tensors_mut() {
            v.iter_mut().for_each(|x| *x = rng.gen_range(-scale..scale));
        }
        p
    }

    pub fn input_dim(&self) -> usize {
        self.w_input.nrows()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w_recurrent.nrows()
    }

    pub(crate) fn tensors(&self) -> [&[f64]; 3] {
        [
            self.w_input.as_slice().expect("standard layout"),
            self.w_recurrent.as_slice().expect("standard layout"),
            self.bias.as_slice().expect("standard layout"),
        ]
    }

    pub(crate) fn tensors_mut(&mut self) -> [&mut [f64]; 3] {
        [
            self.w_input.as_slice_mut().expect("standard layout"),
            self.w_recurrent.as_slice_mut().expect("standard layout"),
            self.bias.as_slice_mut().expect("standard layout"),
        ]
    }

    pub(crate) fn shapes(&self) -> [Vec<usize>; 3] {
        [
            self.w_input.shape().to_vec(),
            self.w_recurrent.shape().to_vec(),
            self.bias.shape().to_vec(),
        ]
    }

    fn activate(&self, input: ArrayView2<f64>, h: ArrayView2<f64>) -> Array2<f64> {
        let hd = self.hidden_dim();
        let mut z = input.dot(&self.w_input) + h.dot(&self.w_recurrent) + &self.bias;
        z.slice_mut(s![.., ..2 * hd]).mapv_inplace(sigmoid);
        z.slice_mut(s![.., 2 * hd..3 * hd]).mapv_inplace(f64::tanh);
        z.slice_mut(s![.., 3 * hd..]).mapv_inplace(sigmoid);
        z
    }

    /// One step over a batch: rows of `input`, `h`, `c` are independent sequences.
    pub fn forward(
        &self,
        input: ArrayView2<f64>,
        h: ArrayView2<f64>,
        c: ArrayView2<f64>,
    ) -> (Array2<f64>, Array2<f64>) {
        let (h, c, _) = self.forward_cached(input, h, c, false);
        (h, c)
    }

    pub(crate) fn forward_cached(
        &self,
        input: ArrayView2<f64>,
        h_prev: ArrayView2<f64>,
        c_prev: ArrayView2<f64>,
        keep: bool,
    ) -> (Array2<f64>, Array2<f64>, Option<StepCache>) {
        let hd = self.hidden_dim();
        let gates = self.activate(input, h_prev);
        let i = gates.slice(s![.., ..hd]);
        let f = gates.slice(s![.., hd..2 * hd]);
        let g = gates.slice(s![.., 2 * hd..3 * hd]);
        let o = gates.slice(s![.., 3 * hd..]);
        let c = &f * &c_prev + &i * &g;
        let tanh_c = c.mapv(f64::tanh);
        let h = &o * &tanh_c;
        let cache = keep.then(|| StepCache {
            input: input.to_owned(),
            h_prev: h_prev.to_owned(),
            c_prev: c_prev.to_owned(),
            gates,
            tanh_c,
        });
        (h, c, cache)
    }

    /// Accumulates parameter gradients into `grads` and returns
    /// `(d_input, d_h_prev, d_c_prev)`; `d_input` only when requested.
    pub(crate) fn backward(
        &self,
        cache: &StepCache,
        dh: &Array2<f64>,
        dc_next: &Array2<f64>,
        grads: &mut LstmLayerParams,
        want_input: bool,
    ) -> (Option<Array2<f64>>, Array2<f64>, Array2<f64>) {
        let hd = self.hidden_dim();
        let gates = &cache.gates;
        let i = gates.slice(s![.., ..hd]);
        let f = gates.slice(s![.., hd..2 * hd]);
        let g = gates.slice(s![.., 2 * hd..3 * hd]);
        let o = gates.slice(s![.., 3 * hd..]);

        let dc = dh * &o * &cache.tanh_c.mapv(|t| 1.0 - t * t) + dc_next;
        let mut dz = Array2::zeros(gates.raw_dim());
        dz.slice_mut(s![.., ..hd])
            .assign(&(&dc * &g * &i.mapv(|v| v * (1.0 - v))));
        dz.slice_mut(s![.., hd..2 * hd])
            .assign(&(&dc * &cache.c_prev * &f.mapv(|v| v * (1.0 - v))));
        dz.slice_mut(s![.., 2 * hd..3 * hd])
            .assign(&(&dc * &i * &g.mapv(|v| 1.0 - v * v)));
        dz.slice_mut(s![.., 3 * hd..])
            .assign(&(dh * &cache.tanh_c * &o.mapv(|v| v * (1.0 - v))));

        grads.w_input += &cache.input.t().dot(&dz);
        grads.w_recurrent += &cache.h_prev.t().dot(&dz);
        grads.bias += &dz.sum_axis(Axis(0));

        let d_input = want_input.then(|| dz.dot(&self.w_input.t()));
        let dh_prev = dz.dot(&self.w_recurrent.t());
        let dc_prev = &dc * &f;
        (d_input, dh_prev, dc_prev)
    }
}

/// Single-sequence convenience form of [`LstmLayerParams::forward`].
pub fn lstm_step(
    x: &Array1<f64>,
    state: (&Array1<f64>, &Array1<f64>),
    params: &LstmLayerParams,
) -> (Array1<f64>, Array1<f64>) {
    let row = |v: &Array1<f64>| v.view().insert_axis(Axis(0)).to_owned();
    let (h, c) = params.forward(row(x).view(), row(state.0).view(), row(state.1).view());
    (h.row(0).to_owned(), c.row(0).to_owned())
}
