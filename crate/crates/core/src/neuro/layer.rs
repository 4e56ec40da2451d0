// SPDX-License-Identifier: Apache-2.0

//! Typed multi-head attention layers: scores, softmax normalisation over
//! incoming edges, typed message passing and the node update, with the
//! matching reverse pass.
//!
//! Parameters of one layer are a stack of `slots · heads · d_head` rows of
//! length `2·d_in` (`W = [L | R]` per slot and head) and the attention
//! vectors. Typed variants have one slot per edge type; untyped variants one
//! shared slot. For an edge `u → v` of type `τ`, head `k`:
//!
//! - dynamic score: `e = aᵀ LeakyReLU(L h_u + R h_v)`
//! - static score: `e = LeakyReLU(a₁ᵀ L h_u + a₂ᵀ R h_v)`
//! - `α = softmax(e)` over all incoming edges of `v` (or per type)
//! - `m_v = Σ α · L h_u`
//!
//! Hidden layers output `concat_k ELU(m_v,k)`; the last layer outputs
//! `ELU(mean_k m_v,k)`.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::tensor::{axpy, dot, elu, elu_grad, leaky_relu, leaky_relu_grad, Matrix};
use super::NeuroError;
use crate::rng::Rng;

/// Incoming-edge lists (CSR by target). Within a target, edges are ordered
/// by `(type, source)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphStructure {
    pub n: usize,
    pub in_ptr: Vec<usize>,
    pub in_src: Vec<usize>,
    pub in_type: Vec<usize>,
}

impl GraphStructure {
    /// Build from directed `(src, dst, type)` message-passing edges.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize, usize)>) -> Result<Self, NeuroError> {
        let mut list: Vec<(usize, usize, usize)> = Vec::new();
        for (s, d, t) in edges {
            if s >= n || d >= n {
                return Err(NeuroError::DimMismatch(format!("edge ({s}, {d}) outside {n} nodes")));
            }
            list.push((d, t, s));
        }
        list.sort_unstable();
        let mut in_ptr = vec![0; n + 1];
        for &(d, _, _) in &list {
            in_ptr[d + 1] += 1;
        }
        for v in 0..n {
            in_ptr[v + 1] += in_ptr[v];
        }
        let s = Self {
            n,
            in_ptr,
            in_src: list.iter().map(|e| e.2).collect(),
            in_type: list.iter().map(|e| e.1).collect(),
        };
        if let Some(v) = (0..n).find(|&v| s.in_ptr[v] == s.in_ptr[v + 1]) {
            return Err(NeuroError::IsolatedNode(v));
        }
        Ok(s)
    }

    pub fn n_edges(&self) -> usize {
        self.in_src.len()
    }

    /// Target node of each edge in CSR order.
    pub fn targets(&self) -> Vec<usize> {
        let mut t = vec![0; self.n_edges()];
        for v in 0..self.n {
            for slot in &mut t[self.in_ptr[v]..self.in_ptr[v + 1]] {
                *slot = v;
            }
        }
        t
    }

    /// Edge-index ranges normalised together by the softmax.
    fn groups(&self, per_type: bool) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.n);
        for v in 0..self.n {
            let (lo, hi) = (self.in_ptr[v], self.in_ptr[v + 1]);
            if !per_type {
                out.push((lo, hi));
                continue;
            }
            let mut start = lo;
            for e in lo + 1..=hi {
                if e == hi || self.in_type[e] != self.in_type[start] {
                    out.push((start, e));
                    start = e;
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Gat,
    Gatv2,
    Etagat,
    Etagatv2,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Gat, Variant::Gatv2, Variant::Etagat, Variant::Etagatv2];

    /// Attention vector after the nonlinearity.
    pub fn is_dynamic(self) -> bool {
        matches!(self, Variant::Gatv2 | Variant::Etagatv2)
    }

    /// Separate parameters per edge type.
    pub fn is_typed(self) -> bool {
        matches!(self, Variant::Etagat | Variant::Etagatv2)
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Gat => "gat",
            Variant::Gatv2 => "gatv2",
            Variant::Etagat => "etagat",
            Variant::Etagatv2 => "etagatv2",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Variant::Gat => "GAT",
            Variant::Gatv2 => "GATv2",
            Variant::Etagat => "EtaGAT",
            Variant::Etagatv2 => "EtaGATv2",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = NeuroError;

    fn from_str(s: &str) -> Result<Self, NeuroError> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s.to_ascii_lowercase())
            .ok_or_else(|| NeuroError::UnknownVariant(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LayerDims {
    pub d_in: usize,
    pub heads: usize,
    pub d_head: usize,
    pub slots: usize,
    /// Concatenate heads (hidden layers) rather than average them (last layer).
    pub concat: bool,
    pub dynamic: bool,
}

impl LayerDims {
    pub fn rows(&self) -> usize {
        self.slots * self.heads * self.d_head
    }

    pub fn weight_len(&self) -> usize {
        self.rows() * 2 * self.d_in
    }

    pub fn attn_per_head(&self) -> usize {
        if self.dynamic {
            self.d_head
        } else {
            2 * self.d_head
        }
    }

    pub fn attn_len(&self) -> usize {
        self.slots * self.heads * self.attn_per_head()
    }

    pub fn d_out(&self) -> usize {
        if self.concat {
            self.heads * self.d_head
        } else {
            self.d_head
        }
    }

    fn slot(&self, edge_type: usize) -> usize {
        if self.slots == 1 {
            0
        } else {
            edge_type
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LayerOptions {
    pub slope: f64,
    pub per_type_softmax: bool,
    pub residual: bool,
}

/// Everything the reverse pass needs from a forward pass.
#[derive(Clone, Debug)]
pub struct LayerCache {
    pub hin: Vec<f64>,
    pl: Vec<f64>,
    pr: Vec<f64>,
    /// Static variants: score pre-activation per (edge, head).
    pre_score: Vec<f64>,
    /// Softmax output per (edge, head), before dropout.
    pub alpha: Vec<f64>,
    /// Dropout scale per (edge, head): 0 or `1/(1-p)`; empty when inactive.
    drop_scale: Vec<f64>,
    /// Activation input per (node, d_out).
    pre: Vec<f64>,
    pub out: Vec<f64>,
}

impl LayerCache {
    /// Attention coefficient of CSR edge `e`, head `k`.
    pub fn alpha_at(&self, e: usize, heads: usize, k: usize) -> f64 {
        self.alpha[e * heads + k]
    }
}

/// Check that every edge type has a parameter slot.
pub fn check_types(dims: &LayerDims, g: &GraphStructure) -> Result<(), NeuroError> {
    if dims.slots > 1 {
        if let Some(&t) = g.in_type.iter().find(|&&t| t >= dims.slots) {
            return Err(NeuroError::UnknownType(t));
        }
    }
    Ok(())
}

pub fn forward(
    dims: &LayerDims,
    w: &[f64],
    a: &[f64],
    hin: &[f64],
    g: &GraphStructure,
    opts: &LayerOptions,
    dropout: Option<(f64, &mut Rng)>,
) -> LayerCache {
    let LayerDims { d_in, heads, d_head: dh, .. } = *dims;
    let n = g.n;
    let rows = dims.rows();
    let ap = dims.attn_per_head();
    debug_assert_eq!(w.len(), dims.weight_len());
    debug_assert_eq!(a.len(), dims.attn_len());
    debug_assert_eq!(hin.len(), n * d_in);

    let mut pl = vec![0.0; n * rows];
    let mut pr = vec![0.0; n * rows];
    for u in 0..n {
        let hu = &hin[u * d_in..(u + 1) * d_in];
        for r in 0..rows {
            let wr = &w[r * 2 * d_in..(r + 1) * 2 * d_in];
            pl[u * rows + r] = dot(&wr[..d_in], hu);
            pr[u * rows + r] = dot(&wr[d_in..], hu);
        }
    }

    let n_e = g.n_edges();
    let mut score = vec![0.0; n_e * heads];
    let mut pre_score = if dims.dynamic { Vec::new() } else { vec![0.0; n_e * heads] };
    for v in 0..n {
        for e in g.in_ptr[v]..g.in_ptr[v + 1] {
            let u = g.in_src[e];
            let s = dims.slot(g.in_type[e]);
            for k in 0..heads {
                let base = (s * heads + k) * dh;
                let lu = &pl[u * rows + base..u * rows + base + dh];
                let rv = &pr[v * rows + base..v * rows + base + dh];
                let av = &a[(s * heads + k) * ap..(s * heads + k + 1) * ap];
                score[e * heads + k] = if dims.dynamic {
                    let mut acc = 0.0;
                    for i in 0..dh {
                        acc += av[i] * leaky_relu(lu[i] + rv[i], opts.slope);
                    }
                    acc
                } else {
                    let t = dot(&av[..dh], lu) + dot(&av[dh..], rv);
                    pre_score[e * heads + k] = t;
                    leaky_relu(t, opts.slope)
                };
            }
        }
    }

    let mut alpha = score;
    for (lo, hi) in g.groups(opts.per_type_softmax) {
        for k in 0..heads {
            let mut mx = f64::NEG_INFINITY;
            for e in lo..hi {
                mx = mx.max(alpha[e * heads + k]);
            }
            let mut sum = 0.0;
            for e in lo..hi {
                let x = (alpha[e * heads + k] - mx).exp();
                alpha[e * heads + k] = x;
                sum += x;
            }
            for e in lo..hi {
                alpha[e * heads + k] /= sum;
            }
        }
    }

    let drop_scale = match dropout {
        Some((p, rng)) if p > 0.0 => {
            let keep = 1.0 / (1.0 - p);
            (0..n_e * heads).map(|_| if rng.gen::<f64>() < p { 0.0 } else { keep }).collect()
        }
        _ => Vec::new(),
    };

    let mut m = vec![0.0; n * heads * dh];
    for v in 0..n {
        for e in g.in_ptr[v]..g.in_ptr[v + 1] {
            let u = g.in_src[e];
            let s = dims.slot(g.in_type[e]);
            for k in 0..heads {
                let mut coef = alpha[e * heads + k];
                if !drop_scale.is_empty() {
                    coef *= drop_scale[e * heads + k];
                }
                let base = (s * heads + k) * dh;
                let src = &pl[u * rows + base..u * rows + base + dh];
                axpy(coef, src, &mut m[(v * heads + k) * dh..(v * heads + k + 1) * dh]);
            }
        }
    }

    let d_out = dims.d_out();
    let pre = if dims.concat {
        m
    } else {
        let mut p = vec![0.0; n * dh];
        let inv = 1.0 / heads as f64;
        for v in 0..n {
            for k in 0..heads {
                axpy(inv, &m[(v * heads + k) * dh..(v * heads + k + 1) * dh], &mut p[v * dh..(v + 1) * dh]);
            }
        }
        p
    };
    let mut out: Vec<f64> = pre.iter().map(|&x| elu(x)).collect();
    if opts.residual {
        debug_assert_eq!(d_out, d_in);
        for (o, h) in out.iter_mut().zip(hin) {
            *o += h;
        }
    }

    LayerCache { hin: hin.to_vec(), pl, pr, pre_score, alpha, drop_scale, pre, out }
}

/// Reverse pass. Accumulates into `dw`, `da` and `dhin`.
#[allow(clippy::too_many_arguments)]
pub fn backward(
    dims: &LayerDims,
    w: &[f64],
    a: &[f64],
    g: &GraphStructure,
    opts: &LayerOptions,
    cache: &LayerCache,
    dout: &[f64],
    dw: &mut [f64],
    da: &mut [f64],
    dhin: &mut [f64],
) {
    let LayerDims { d_in, heads, d_head: dh, .. } = *dims;
    let n = g.n;
    let rows = dims.rows();
    let ap = dims.attn_per_head();
    let pl = &cache.pl;
    let pr = &cache.pr;

    let dpre: Vec<f64> = dout.iter().zip(&cache.pre).map(|(&d, &x)| d * elu_grad(x)).collect();
    let mut dm = vec![0.0; n * heads * dh];
    if dims.concat {
        dm.copy_from_slice(&dpre);
    } else {
        let inv = 1.0 / heads as f64;
        for v in 0..n {
            for k in 0..heads {
                for i in 0..dh {
                    dm[(v * heads + k) * dh + i] = dpre[v * dh + i] * inv;
                }
            }
        }
    }

    let mut dpl = vec![0.0; n * rows];
    let mut dpr = vec![0.0; n * rows];
    let n_e = g.n_edges();
    let mut dalpha = vec![0.0; n_e * heads];
    for v in 0..n {
        for e in g.in_ptr[v]..g.in_ptr[v + 1] {
            let u = g.in_src[e];
            let s = dims.slot(g.in_type[e]);
            for k in 0..heads {
                let base = (s * heads + k) * dh;
                let dmv = &dm[(v * heads + k) * dh..(v * heads + k + 1) * dh];
                let scale = if cache.drop_scale.is_empty() { 1.0 } else { cache.drop_scale[e * heads + k] };
                let coef = cache.alpha[e * heads + k] * scale;
                dalpha[e * heads + k] = dot(dmv, &pl[u * rows + base..u * rows + base + dh]) * scale;
                axpy(coef, dmv, &mut dpl[u * rows + base..u * rows + base + dh]);
            }
        }
    }

    let mut dscore = vec![0.0; n_e * heads];
    for (lo, hi) in g.groups(opts.per_type_softmax) {
        for k in 0..heads {
            let mut s = 0.0;
            for e in lo..hi {
                s += cache.alpha[e * heads + k] * dalpha[e * heads + k];
            }
            for e in lo..hi {
                dscore[e * heads + k] = cache.alpha[e * heads + k] * (dalpha[e * heads + k] - s);
            }
        }
    }

    for v in 0..n {
        for e in g.in_ptr[v]..g.in_ptr[v + 1] {
            let u = g.in_src[e];
            let s = dims.slot(g.in_type[e]);
            for k in 0..heads {
                let de = dscore[e * heads + k];
                if de == 0.0 {
                    continue;
                }
                let base = (s * heads + k) * dh;
                let ab = (s * heads + k) * ap;
                let (lu, rv) = (u * rows + base, v * rows + base);
                if dims.dynamic {
                    for i in 0..dh {
                        let z = pl[lu + i] + pr[rv + i];
                        da[ab + i] += de * leaky_relu(z, opts.slope);
                        let dz = de * a[ab + i] * leaky_relu_grad(z, opts.slope);
                        dpl[lu + i] += dz;
                        dpr[rv + i] += dz;
                    }
                } else {
                    let dt = de * leaky_relu_grad(cache.pre_score[e * heads + k], opts.slope);
                    for i in 0..dh {
                        da[ab + i] += dt * pl[lu + i];
                        da[ab + dh + i] += dt * pr[rv + i];
                        dpl[lu + i] += dt * a[ab + i];
                        dpr[rv + i] += dt * a[ab + dh + i];
                    }
                }
            }
        }
    }

    let hin = &cache.hin;
    for u in 0..n {
        let hu = &hin[u * d_in..(u + 1) * d_in];
        let dhu = &mut dhin[u * d_in..(u + 1) * d_in];
        for r in 0..rows {
            let (gl, gr) = (dpl[u * rows + r], dpr[u * rows + r]);
            if gl == 0.0 && gr == 0.0 {
                continue;
            }
            let wr = &w[r * 2 * d_in..(r + 1) * 2 * d_in];
            let dwr = &mut dw[r * 2 * d_in..(r + 1) * 2 * d_in];
            axpy(gl, hu, &mut dwr[..d_in]);
            axpy(gr, hu, &mut dwr[d_in..]);
            axpy(gl, &wr[..d_in], dhu);
            axpy(gr, &wr[d_in..], dhu);
        }
    }
    if opts.residual {
        for (d, o) in dhin.iter_mut().zip(dout) {
            *d += o;
        }
    }
}

/// Owned parameters of one layer, convenient for tests and inspection.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerParams {
    pub dims: LayerDims,
    pub weight: Vec<f64>,
    pub attn: Vec<f64>,
}

impl LayerParams {
    /// `W_{slot,head}` as a `d_head × 2·d_in` matrix.
    pub fn w_matrix(&self, slot: usize, head: usize) -> Matrix {
        let d = self.dims;
        let r0 = (slot * d.heads + head) * d.d_head;
        let len = 2 * d.d_in;
        Matrix::from_vec(d.d_head, len, self.weight[r0 * len..(r0 + d.d_head) * len].to_vec())
    }

    pub fn a_vector(&self, slot: usize, head: usize) -> &[f64] {
        let ap = self.dims.attn_per_head();
        let i = slot * self.dims.heads + head;
        &self.attn[i * ap..(i + 1) * ap]
    }
}

/// Run one layer on a node matrix.
pub fn layer_forward(hin: &Matrix, g: &GraphStructure, lp: &LayerParams, opts: &LayerOptions) -> Result<Matrix, NeuroError> {
    if hin.cols != lp.dims.d_in || hin.rows != g.n {
        return Err(NeuroError::DimMismatch(format!(
            "input is {}×{}, layer expects {}×{}",
            hin.rows, hin.cols, g.n, lp.dims.d_in
        )));
    }
    if lp.weight.len() != lp.dims.weight_len() || lp.attn.len() != lp.dims.attn_len() {
        return Err(NeuroError::DimMismatch("layer parameter lengths".into()));
    }
    if opts.residual && lp.dims.d_out() != lp.dims.d_in {
        return Err(NeuroError::DimMismatch("residual needs d_out = d_in".into()));
    }
    check_types(&lp.dims, g)?;
    let cache = forward(&lp.dims, &lp.weight, &lp.attn, &hin.data, g, opts, None);
    Ok(Matrix::from_vec(g.n, lp.dims.d_out(), cache.out))
}
