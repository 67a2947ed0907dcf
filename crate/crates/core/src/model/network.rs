use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{logistic, ModelConfig};
use crate::error::{Error, Result};

/// Gate pre-activations are kept in this band so the logistic stays
/// strictly inside (0, 1) in double precision.
pub(crate) const GATE_RAW_LIMIT: f64 = 30.0;

/// Named slices of the flat parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamGroup {
    ConvWeight(usize),
    ConvBias(usize),
    HiddenWeight,
    HiddenBias,
    OutputWeight,
    OutputBias,
    GateRaw,
}

impl ParamGroup {
    pub fn name(&self) -> String {
        match self {
            ParamGroup::ConvWeight(i) => format!("conv{}.weight", i + 1),
            ParamGroup::ConvBias(i) => format!("conv{}.bias", i + 1),
            ParamGroup::HiddenWeight => "dense1.weight".into(),
            ParamGroup::HiddenBias => "dense1.bias".into(),
            ParamGroup::OutputWeight => "dense2.weight".into(),
            ParamGroup::OutputBias => "dense2.bias".into(),
            ParamGroup::GateRaw => "gate.raw".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Layout {
    conv_w: [Range<usize>; 3],
    conv_b: [Range<usize>; 3],
    hidden_w: Range<usize>,
    hidden_b: Range<usize>,
    out_w: Range<usize>,
    out_b: Range<usize>,
    gate: Range<usize>,
    total: usize,
}

impl Layout {
    fn new(c: &ModelConfig) -> Self {
        let mut at = 0;
        let mut take = |n: usize| {
            let r = at..at + n;
            at += n;
            r
        };
        let chans = [
            1,
            c.conv_channels[0],
            c.conv_channels[1],
            c.conv_channels[2],
        ];
        let mut conv_w: [Range<usize>; 3] = Default::default();
        let mut conv_b: [Range<usize>; 3] = Default::default();
        for i in 0..3 {
            conv_w[i] = take(chans[i + 1] * chans[i] * c.kernel_width);
            conv_b[i] = take(chans[i + 1]);
        }
        let hidden_w = take(c.dense_hidden * c.flat_features());
        let hidden_b = take(c.dense_hidden);
        let out_w = take(c.num_classes * c.dense_hidden);
        let out_b = take(c.num_classes);
        let gate = take(if c.use_gating { c.input_rows } else { 0 });
        Self {
            conv_w,
            conv_b,
            hidden_w,
            hidden_b,
            out_w,
            out_b,
            gate,
            total: at,
        }
    }

    fn range(&self, g: ParamGroup) -> Range<usize> {
        match g {
            ParamGroup::ConvWeight(i) => self.conv_w[i].clone(),
            ParamGroup::ConvBias(i) => self.conv_b[i].clone(),
            ParamGroup::HiddenWeight => self.hidden_w.clone(),
            ParamGroup::HiddenBias => self.hidden_b.clone(),
            ParamGroup::OutputWeight => self.out_w.clone(),
            ParamGroup::OutputBias => self.out_b.clone(),
            ParamGroup::GateRaw => self.gate.clone(),
        }
    }
}

fn all_groups(c: &ModelConfig) -> Vec<ParamGroup> {
    let mut g = vec![];
    for i in 0..3 {
        g.push(ParamGroup::ConvWeight(i));
        g.push(ParamGroup::ConvBias(i));
    }
    g.extend([
        ParamGroup::HiddenWeight,
        ParamGroup::HiddenBias,
        ParamGroup::OutputWeight,
        ParamGroup::OutputBias,
    ]);
    if c.use_gating {
        g.push(ParamGroup::GateRaw);
    }
    g
}

/// Gradient of the loss with the same layout as the model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    layout: Layout,
    data: Vec<f64>,
}

impl Gradients {
    pub fn group(&self, g: ParamGroup) -> &[f64] {
        &self.data[self.layout.range(g)]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GatedModel {
    config: ModelConfig,
    layout: Layout,
    params: Vec<f64>,
}

/// Per-sample convolutional activations kept for the backward pass.
struct ConvTrace {
    // Block inputs (inputs[0] is the raw input) and post-ReLU conv outputs.
    inputs: [Vec<f64>; 4],
    relu: [Vec<f64>; 3],
    argmax: [Vec<usize>; 3],
}

/// Dense-head activations for a whole batch, one row per sample.
struct Head {
    flat: Vec<f64>,
    hidden: Vec<f64>,
    probs: Vec<f64>,
}

impl GatedModel {
    /// Fresh model: weights uniform in `±1/sqrt(fan_in)`, biases zero, gates
    /// at `logistic(0) = 0.5`.
    pub fn new(config: ModelConfig) -> Result<Self> {
        config.validate()?;
        let layout = Layout::new(&config);
        let mut params = vec![0.0; layout.total];
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let chans = [
            1,
            config.conv_channels[0],
            config.conv_channels[1],
            config.conv_channels[2],
        ];
        let mut fill = |r: Range<usize>, fan_in: usize| {
            let bound = 1.0 / (fan_in as f64).sqrt();
            for p in &mut params[r] {
                *p = rng.gen_range(-bound..bound);
            }
        };
        for (w, &c_in) in layout.conv_w.iter().zip(&chans) {
            fill(w.clone(), c_in * config.kernel_width);
        }
        fill(layout.hidden_w.clone(), config.flat_features());
        fill(layout.out_w.clone(), config.dense_hidden);
        Ok(Self {
            config,
            layout,
            params,
        })
    }

    pub(crate) fn from_parts(config: ModelConfig, params: Vec<f64>) -> Result<Self> {
        config.validate()?;
        let layout = Layout::new(&config);
        if params.len() != layout.total {
            return Err(Error::ShapeMismatch {
                expected: format!("{} parameters", layout.total),
                actual: format!("{}", params.len()),
            });
        }
        Ok(Self {
            config,
            layout,
            params,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn groups(&self) -> Vec<ParamGroup> {
        all_groups(&self.config)
    }

    pub fn group(&self, g: ParamGroup) -> &[f64] {
        &self.params[self.layout.range(g)]
    }

    pub fn group_mut(&mut self, g: ParamGroup) -> &mut [f64] {
        let r = self.layout.range(g);
        &mut self.params[r]
    }

    /// Effective gate weights in (0, 1); empty when gating is off.
    pub fn gates(&self) -> Vec<f64> {
        self.group(ParamGroup::GateRaw)
            .iter()
            .map(|&r| logistic(r))
            .collect()
    }

    /// Plain SGD step `p -= lr * g`, then gate pre-activations are clamped
    /// to `±GATE_RAW_LIMIT`.
    pub fn apply_gradients(&mut self, grads: &Gradients, lr: f64) {
        for (p, g) in self.params.iter_mut().zip(&grads.data) {
            *p -= lr * g;
        }
        let r = self.layout.gate.clone();
        for p in &mut self.params[r] {
            *p = p.clamp(-GATE_RAW_LIMIT, GATE_RAW_LIMIT);
        }
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        let expected = self.config.input_rows * self.config.input_cols;
        if input.len() != expected {
            return Err(Error::ShapeMismatch {
                expected: format!(
                    "{} x {} input ({} values)",
                    self.config.input_rows, self.config.input_cols, expected
                ),
                actual: format!("{} values", input.len()),
            });
        }
        Ok(())
    }

    /// Class probabilities for one `rows x cols` row-major input.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_batch(&[input])?.remove(0))
    }

    /// Class probabilities for several inputs at once.
    pub fn forward_batch(&self, inputs: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
        for x in inputs {
            self.check_input(x)?;
        }
        if inputs.is_empty() {
            return Ok(Vec::new());
        }
        let (_, head) = self.run(inputs);
        let k = self.config.num_classes;
        Ok(head.probs.chunks_exact(k).map(<[f64]>::to_vec).collect())
    }

    pub fn predict(&self, input: &[f64]) -> Result<usize> {
        let p = self.forward(input)?;
        Ok(argmax(&p))
    }

    /// Mean cross-entropy over the batch and its exact gradient.
    pub fn loss_and_gradients(&self, batch: &[(&[f64], usize)]) -> Result<(f64, Gradients)> {
        if batch.is_empty() {
            return Err(Error::EmptyDataset);
        }
        for &(x, y) in batch {
            self.check_input(x)?;
            if y >= self.config.num_classes {
                return Err(Error::LabelOutOfRange {
                    label: y,
                    classes: self.config.num_classes,
                });
            }
        }
        let inputs: Vec<&[f64]> = batch.iter().map(|&(x, _)| x).collect();
        let (traces, head) = self.run(&inputs);
        let mut grad = vec![0.0; self.layout.total];
        let scale = 1.0 / batch.len() as f64;
        let k = self.config.num_classes;
        let mut loss = 0.0;
        let mut d_logits: Vec<f64> = head.probs.iter().map(|p| p * scale).collect();
        for (i, &(_, y)) in batch.iter().enumerate() {
            loss -= head.probs[i * k + y].max(f64::MIN_POSITIVE).ln();
            d_logits[i * k + y] -= scale;
        }
        let d_flat = self.head_backward(&head, &d_logits, batch.len(), &mut grad);
        let nf = self.config.flat_features();
        for (t, d) in traces.iter().zip(d_flat.chunks_exact(nf)) {
            self.conv_backward_sample(t, d, &mut grad);
        }
        Ok((
            loss * scale,
            Gradients {
                layout: self.layout.clone(),
                data: grad,
            },
        ))
    }

    fn run(&self, inputs: &[&[f64]]) -> (Vec<ConvTrace>, Head) {
        let nf = self.config.flat_features();
        let mut flat = vec![0.0; inputs.len() * nf];
        let gates = self.gates();
        let traces: Vec<ConvTrace> = inputs
            .iter()
            .zip(flat.chunks_exact_mut(nf))
            .map(|(x, f)| {
                let t = self.conv_trace(x);
                self.flatten(&t.inputs[3], &gates, f);
                t
            })
            .collect();
        (traces, self.head(flat, inputs.len()))
    }

    fn conv_trace(&self, input: &[f64]) -> ConvTrace {
        let c = &self.config;
        let rows = c.input_rows;
        let chans = [
            1,
            c.conv_channels[0],
            c.conv_channels[1],
            c.conv_channels[2],
        ];
        let pooled = c.pooled_cols();
        let cols = [c.input_cols, pooled[0], pooled[1], pooled[2]];

        let mut inputs: [Vec<f64>; 4] = Default::default();
        let mut relu: [Vec<f64>; 3] = Default::default();
        let mut argmax: [Vec<usize>; 3] = Default::default();
        inputs[0] = input.to_vec();
        for i in 0..3 {
            let mut z = conv_forward(
                &inputs[i],
                &self.params[self.layout.conv_w[i].clone()],
                &self.params[self.layout.conv_b[i].clone()],
                chans[i],
                rows,
                cols[i],
                c.kernel_width,
            );
            z.iter_mut().for_each(|v| *v = v.max(0.0));
            let (p, am) = max_pool(&z, chans[i + 1] * rows, cols[i], c.pool_width);
            relu[i] = z;
            argmax[i] = am;
            inputs[i + 1] = p;
        }
        ConvTrace {
            inputs,
            relu,
            argmax,
        }
    }

    /// `[channel][row][col]` -> `[row][channel][col]`, each row scaled by
    /// its gate.
    fn flatten(&self, last: &[f64], gates: &[f64], flat: &mut [f64]) {
        let c = &self.config;
        let (rows, ch, len) = (c.input_rows, c.conv_channels[2], c.pooled_cols()[2]);
        for r in 0..rows {
            let w = if c.use_gating { gates[r] } else { 1.0 };
            for k in 0..ch {
                let src = &last[(k * rows + r) * len..][..len];
                let dst = &mut flat[(r * ch + k) * len..][..len];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d = w * s;
                }
            }
        }
    }

    fn head(&self, flat: Vec<f64>, n: usize) -> Head {
        let c = &self.config;
        let l = &self.layout;
        let (nf, hid, k) = (c.flat_features(), c.dense_hidden, c.num_classes);
        let broadcast =
            |b: &[f64]| -> Vec<f64> { (0..n).flat_map(|_| b.iter().copied()).collect() };

        let w1 = &self.params[l.hidden_w.clone()];
        let mut hidden = broadcast(&self.params[l.hidden_b.clone()]);
        gemm(
            n,
            nf,
            hid,
            &flat,
            (nf, 1),
            w1,
            (1, nf),
            1.0,
            &mut hidden,
            (hid, 1),
        );
        hidden.iter_mut().for_each(|v| *v = v.max(0.0));

        let w2 = &self.params[l.out_w.clone()];
        let mut logits = broadcast(&self.params[l.out_b.clone()]);
        gemm(
            n,
            hid,
            k,
            &hidden,
            (hid, 1),
            w2,
            (1, hid),
            1.0,
            &mut logits,
            (k, 1),
        );
        let probs = logits.chunks_exact(k).flat_map(softmax).collect();
        Head {
            flat,
            hidden,
            probs,
        }
    }

    /// Accumulates dense-layer gradients and returns the gradient with
    /// respect to the flattened features, one row per sample.
    fn head_backward(&self, h: &Head, d_logits: &[f64], n: usize, grad: &mut [f64]) -> Vec<f64> {
        let c = &self.config;
        let l = &self.layout;
        let (nf, hid, k) = (c.flat_features(), c.dense_hidden, c.num_classes);
        let col_sums = |m: &[f64], width: usize, out: &mut [f64]| {
            for row in m.chunks_exact(width) {
                out.iter_mut().zip(row).for_each(|(o, v)| *o += v);
            }
        };

        col_sums(d_logits, k, &mut grad[l.out_b.clone()]);
        gemm(
            k,
            n,
            hid,
            d_logits,
            (1, k),
            &h.hidden,
            (hid, 1),
            1.0,
            &mut grad[l.out_w.clone()],
            (hid, 1),
        );
        let mut d_hidden = vec![0.0; n * hid];
        let w2 = &self.params[l.out_w.clone()];
        gemm(
            n,
            k,
            hid,
            d_logits,
            (k, 1),
            w2,
            (hid, 1),
            0.0,
            &mut d_hidden,
            (hid, 1),
        );
        for (d, &v) in d_hidden.iter_mut().zip(&h.hidden) {
            if v <= 0.0 {
                *d = 0.0;
            }
        }

        col_sums(&d_hidden, hid, &mut grad[l.hidden_b.clone()]);
        gemm(
            hid,
            n,
            nf,
            &d_hidden,
            (1, hid),
            &h.flat,
            (nf, 1),
            1.0,
            &mut grad[l.hidden_w.clone()],
            (nf, 1),
        );
        let mut d_flat = vec![0.0; n * nf];
        let w1 = &self.params[l.hidden_w.clone()];
        gemm(
            n,
            hid,
            nf,
            &d_hidden,
            (hid, 1),
            w1,
            (nf, 1),
            0.0,
            &mut d_flat,
            (nf, 1),
        );
        d_flat
    }

    fn conv_backward_sample(&self, t: &ConvTrace, d_flat: &[f64], grad: &mut [f64]) {
        let c = &self.config;
        let l = &self.layout;
        let rows = c.input_rows;
        let chans = [
            1,
            c.conv_channels[0],
            c.conv_channels[1],
            c.conv_channels[2],
        ];
        let pooled = c.pooled_cols();
        let cols = [c.input_cols, pooled[0], pooled[1], pooled[2]];

        // Undo the gate and the [row][channel][col] flattening.
        let (ch, len) = (chans[3], cols[3]);
        let gates = self.gates();
        let mut d_pool = vec![0.0; ch * rows * len];
        for r in 0..rows {
            let w = if c.use_gating { gates[r] } else { 1.0 };
            let mut d_w = 0.0;
            for k in 0..ch {
                let src = (k * rows + r) * len;
                let dst = (r * ch + k) * len;
                for j in 0..len {
                    let g = d_flat[dst + j];
                    d_pool[src + j] = g * w;
                    d_w += g * t.inputs[3][src + j];
                }
            }
            if c.use_gating {
                grad[l.gate.start + r] += d_w * w * (1.0 - w);
            }
        }

        let mut d_out = d_pool;
        for i in (0..3).rev() {
            let mut d_z = vec![0.0; t.relu[i].len()];
            for (o, &src) in t.argmax[i].iter().enumerate() {
                d_z[src] += d_out[o];
            }
            for (d, &z) in d_z.iter_mut().zip(&t.relu[i]) {
                if z <= 0.0 {
                    *d = 0.0;
                }
            }
            let w_range = l.conv_w[i].clone();
            let b_range = l.conv_b[i].clone();
            d_out = conv_backward(
                &t.inputs[i],
                &self.params[w_range.clone()],
                &d_z,
                chans[i],
                chans[i + 1],
                rows,
                cols[i],
                c.kernel_width,
                grad,
                w_range.start,
                b_range.start,
                i > 0,
            );
        }
    }
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|&z| (z - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// `out[o] = b[o] + sum_j w[o][j] x[j]`, with `w` row-major `outputs x inputs`.
/// Row/column strides of a matrix view.
type Strides = (usize, usize);

/// Bounds-checked wrapper around `matrixmultiply::dgemm`:
/// `c = a * b + beta * c` with `a` of shape `m x k` and `b` of shape `k x n`.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    sa: Strides,
    b: &[f64],
    sb: Strides,
    beta: f64,
    c: &mut [f64],
    sc: Strides,
) {
    let last = |rows: usize, cols: usize, (r, c): Strides| (rows - 1) * r + (cols - 1) * c;
    if m == 0 || k == 0 || n == 0 {
        return;
    }
    assert!(last(m, k, sa) < a.len() && last(k, n, sb) < b.len() && last(m, n, sc) < c.len());
    // SAFETY: the assertion above keeps every element addressed through the
    // given shapes and strides inside the three slices, and `c` is borrowed
    // mutably so it cannot alias `a` or `b`.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            sa.0 as isize,
            sa.1 as isize,
            b.as_ptr(),
            sb.0 as isize,
            sb.1 as isize,
            beta,
            c.as_mut_ptr(),
            sc.0 as isize,
            sc.1 as isize,
        );
    }
}

/// Geometry of a same-padded convolution over `rows` strips of `len`
/// columns. Each channel becomes one buffer of zero-padded strips of
/// `stride = len + kernel - 1` columns; output column `j` of strip `r` is
/// then position `r * stride + j` of a plain correlation over that buffer,
/// with scratch positions in between.
struct Strips {
    rows: usize,
    len: usize,
    kernel: usize,
    pad: usize,
    stride: usize,
    span: usize,
}

impl Strips {
    fn new(rows: usize, len: usize, kernel: usize) -> Self {
        let stride = len + kernel - 1;
        Self {
            rows,
            len,
            kernel,
            pad: (kernel - 1) / 2,
            stride,
            span: rows * stride - (kernel - 1),
        }
    }

    /// Copies `[channel][row][col]` data into zeroed per-channel buffers of
    /// length `total`, strip `r` starting at `offset + r * stride`.
    fn place(&self, x: &[f64], channels: usize, offset: usize, total: usize) -> Vec<f64> {
        let mut p = vec![0.0; channels * total];
        for c in 0..channels {
            for r in 0..self.rows {
                let src = &x[(c * self.rows + r) * self.len..][..self.len];
                p[c * total + offset + r * self.stride..][..self.len].copy_from_slice(src);
            }
        }
        p
    }

    /// Inverse of [`Strips::place`].
    fn gather(&self, p: &[f64], channels: usize, offset: usize, total: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(channels * self.rows * self.len);
        for c in 0..channels {
            for r in 0..self.rows {
                out.extend_from_slice(&p[c * total + offset + r * self.stride..][..self.len]);
            }
        }
        out
    }

    /// `[channel * kernel + tap][position]` patch matrix of a placed input.
    fn im2col(&self, xp: &[f64], channels: usize) -> Vec<f64> {
        let (k, span, total) = (self.kernel, self.span, self.rows * self.stride);
        let mut cols = Vec::with_capacity(channels * k * span);
        for c in 0..channels {
            for u in 0..k {
                cols.extend_from_slice(&xp[c * total + u..][..span]);
            }
        }
        cols
    }
}

/// Same-padded 1-D convolution along columns, shared across rows. Tensors
/// are `[channel][row][col]`; weights `[out][in][tap]`.
fn conv_forward(
    x: &[f64],
    w: &[f64],
    b: &[f64],
    c_in: usize,
    rows: usize,
    len: usize,
    kernel: usize,
) -> Vec<f64> {
    let g = Strips::new(rows, len, kernel);
    let (c_out, span, ck) = (b.len(), g.span, c_in * kernel);
    let cols = g.im2col(&g.place(x, c_in, g.pad, rows * g.stride), c_in);
    let mut z: Vec<f64> = b
        .iter()
        .flat_map(|&v| std::iter::repeat_n(v, span))
        .collect();
    gemm(
        c_out,
        ck,
        span,
        w,
        (ck, 1),
        &cols,
        (span, 1),
        1.0,
        &mut z,
        (span, 1),
    );
    g.gather(&z, c_out, 0, span)
}

/// Accumulates weight and bias gradients into `grad` and returns the
/// gradient with respect to the layer input (empty when not needed).
#[allow(clippy::too_many_arguments)]
fn conv_backward(
    x: &[f64],
    w: &[f64],
    d_z: &[f64],
    c_in: usize,
    c_out: usize,
    rows: usize,
    len: usize,
    kernel: usize,
    grad: &mut [f64],
    w_offset: usize,
    b_offset: usize,
    need_input_grad: bool,
) -> Vec<f64> {
    let g = Strips::new(rows, len, kernel);
    let (span, ck, total) = (g.span, c_in * kernel, rows * g.stride);
    let cols = g.im2col(&g.place(x, c_in, g.pad, total), c_in);
    let dz = g.place(d_z, c_out, 0, span);
    for o in 0..c_out {
        grad[b_offset + o] += d_z[o * rows * len..][..rows * len].iter().sum::<f64>();
    }
    let gw = &mut grad[w_offset..w_offset + c_out * ck];
    gemm(
        c_out,
        span,
        ck,
        &dz,
        (span, 1),
        &cols,
        (1, span),
        1.0,
        gw,
        (ck, 1),
    );
    if !need_input_grad {
        return Vec::new();
    }
    let mut d_cols = vec![0.0; ck * span];
    gemm(
        ck,
        c_out,
        span,
        w,
        (1, ck),
        &dz,
        (span, 1),
        0.0,
        &mut d_cols,
        (span, 1),
    );
    let mut dxp = vec![0.0; c_in * total];
    for c in 0..c_in {
        for u in 0..kernel {
            let src = &d_cols[(c * kernel + u) * span..][..span];
            for (d, s) in dxp[c * total + u..][..span].iter_mut().zip(src) {
                *d += s;
            }
        }
    }
    g.gather(&dxp, c_in, g.pad, total)
}

/// Non-overlapping max pool of width `width` along the last axis of
/// `strips x len`; trailing columns that do not fill a window are dropped.
/// Returns pooled values and the flat source index of each maximum (first
/// one on ties).
fn max_pool(x: &[f64], strips: usize, len: usize, width: usize) -> (Vec<f64>, Vec<usize>) {
    let out_len = len / width;
    let mut out = Vec::with_capacity(strips * out_len);
    let mut idx = Vec::with_capacity(strips * out_len);
    for s in 0..strips {
        for j in 0..out_len {
            let start = s * len + j * width;
            let mut best = start;
            for i in start + 1..start + width {
                if x[i] > x[best] {
                    best = i;
                }
            }
            out.push(x[best]);
            idx.push(best);
        }
    }
    (out, idx)
}
