// SPDX-License-Identifier: Apache-2.0

//! Full classifier: affine node embedding, `L` attention layers, mean-pool
//! readout and a two-layer MLP head with softmax output. Parameters live in
//! one flat vector described by a named shape manifest.

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::features::{GraphInput, N_EDGE_TYPES};
use super::layer::{self, check_types, LayerCache, LayerDims, LayerOptions, LayerParams, Variant};
use super::tensor::{axpy, dot, elu, elu_grad, softmax_in_place, Matrix};
use super::NeuroError;
use crate::fault::{N_CLASSES, N_FEATURES};
use crate::rng::{seeded, Rng};

/// Training and architecture settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub hidden_dim: usize,
    pub heads: usize,
    pub layers: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    pub variant: Variant,
    pub seed: u64,
    pub leaky_slope: f64,
    pub dropout_rate: f64,
    #[serde(default)]
    pub residual: bool,
    #[serde(default)]
    pub per_type_softmax: bool,
    #[serde(default)]
    pub label_smoothing: f64,
}

impl Hyperparams {
    /// Settings of the original large-scale experiments.
    pub fn paper(variant: Variant) -> Self {
        Self {
            hidden_dim: 128,
            heads: 8,
            layers: 2,
            batch_size: 4,
            learning_rate: 1e-4,
            weight_decay: 1e-5,
            epochs: 400,
            variant,
            seed: 0,
            leaky_slope: 0.2,
            dropout_rate: 0.1,
            residual: false,
            per_type_softmax: false,
            label_smoothing: 0.0,
        }
    }

    /// Laptop-sized defaults.
    pub fn desk(variant: Variant) -> Self {
        Self { hidden_dim: 32, heads: 4, learning_rate: 1e-3, epochs: 20, ..Self::paper(variant) }
    }

    pub fn validate(&self) -> Result<(), NeuroError> {
        let bad = |m: &str| Err(NeuroError::InvalidHyperparams(m.to_string()));
        if self.hidden_dim == 0 || self.heads == 0 || self.hidden_dim % self.heads != 0 {
            return bad("hidden_dim must be a positive multiple of heads");
        }
        if self.layers == 0 || self.batch_size == 0 {
            return bad("layers and batch_size must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return bad("learning_rate must lie in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.weight_decay) {
            return bad("weight_decay must lie in [0, 1]");
        }
        if !(0.0..1.0).contains(&self.dropout_rate) || !(0.0..1.0).contains(&self.label_smoothing) {
            return bad("dropout_rate and label_smoothing must lie in [0, 1)");
        }
        if !(self.leaky_slope > 0.0 && self.leaky_slope <= 1.0) {
            return bad("leaky_slope must lie in (0, 1]");
        }
        Ok(())
    }

    /// Architecture for the misconfiguration task.
    pub fn architecture(&self) -> Architecture {
        Architecture {
            d_feat: N_FEATURES,
            n_classes: N_CLASSES,
            n_types: N_EDGE_TYPES,
            hidden: self.hidden_dim,
            heads: self.heads,
            layers: self.layers,
            variant: self.variant,
            residual: self.residual,
            per_type_softmax: self.per_type_softmax,
            leaky_slope: self.leaky_slope,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Architecture {
    pub d_feat: usize,
    pub n_classes: usize,
    pub n_types: usize,
    pub hidden: usize,
    pub heads: usize,
    pub layers: usize,
    pub variant: Variant,
    pub residual: bool,
    pub per_type_softmax: bool,
    pub leaky_slope: f64,
}

impl Architecture {
    pub fn layer_dims(&self, l: usize) -> LayerDims {
        let last = l + 1 == self.layers;
        LayerDims {
            d_in: self.hidden,
            heads: self.heads,
            d_head: if last { self.hidden } else { self.hidden / self.heads },
            slots: if self.variant.is_typed() { self.n_types } else { 1 },
            concat: !last,
            dynamic: self.variant.is_dynamic(),
        }
    }

    pub fn layer_options(&self) -> LayerOptions {
        LayerOptions { slope: self.leaky_slope, per_type_softmax: self.per_type_softmax, residual: self.residual }
    }

    /// Named tensors in storage order.
    pub fn manifest(&self) -> Vec<TensorSpec> {
        let h = self.hidden;
        let mut shapes: Vec<(String, Vec<usize>)> =
            vec![("embed.weight".into(), vec![h, self.d_feat]), ("embed.bias".into(), vec![h])];
        for l in 0..self.layers {
            let d = self.layer_dims(l);
            shapes.push((format!("layers.{l}.weight"), vec![d.slots, d.heads, d.d_head, 2 * d.d_in]));
            shapes.push((format!("layers.{l}.attn"), vec![d.slots, d.heads, d.attn_per_head()]));
        }
        shapes.push(("mlp.0.weight".into(), vec![h, h]));
        shapes.push(("mlp.0.bias".into(), vec![h]));
        shapes.push(("mlp.1.weight".into(), vec![self.n_classes, h]));
        shapes.push(("mlp.1.bias".into(), vec![self.n_classes]));
        let mut offset = 0;
        shapes
            .into_iter()
            .map(|(name, shape)| {
                let len = shape.iter().product();
                let t = TensorSpec { name, shape, offset, len };
                offset += len;
                t
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorSpec {
    pub name: String,
    pub shape: Vec<usize>,
    pub offset: usize,
    pub len: usize,
}

impl TensorSpec {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len
    }
}

/// Positions of the tensors inside the flat parameter vector.
#[derive(Clone, Debug)]
struct Offsets {
    embed_w: usize,
    embed_b: usize,
    layers: Vec<(usize, usize)>,
    w1: usize,
    b1: usize,
    w2: usize,
    b2: usize,
}

impl Offsets {
    fn new(manifest: &[TensorSpec], layers: usize) -> Self {
        let o = |i: usize| manifest[i].offset;
        Offsets {
            embed_w: o(0),
            embed_b: o(1),
            layers: (0..layers).map(|l| (o(2 + 2 * l), o(3 + 2 * l))).collect(),
            w1: o(2 + 2 * layers),
            b1: o(3 + 2 * layers),
            w2: o(4 + 2 * layers),
            b2: o(5 + 2 * layers),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ModelParams {
    pub arch: Architecture,
    pub manifest: Vec<TensorSpec>,
    pub data: Vec<f64>,
    offsets: Offsets,
}

impl PartialEq for ModelParams {
    fn eq(&self, other: &Self) -> bool {
        self.arch == other.arch && self.data == other.data
    }
}

impl ModelParams {
    /// Glorot-uniform weights and zero biases.
    pub fn init(arch: Architecture, seed: u64) -> Self {
        let manifest = arch.manifest();
        let total = manifest.last().map_or(0, |t| t.offset + t.len);
        let mut data = vec![0.0; total];
        let mut rng = seeded(seed);
        for t in &manifest {
            if t.name.ends_with(".bias") {
                continue;
            }
            let (fan_in, fan_out) = match t.shape.as_slice() {
                [o, i] => (*i, *o),
                [_, _, dh, two_d] => (*two_d, *dh),
                [_, _, ap] => (*ap, 1),
                _ => unreachable!("manifest shapes"),
            };
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for x in &mut data[t.range()] {
                *x = rng.gen_range(-limit..limit);
            }
        }
        Self::from_data(arch, data).expect("sizes match")
    }

    pub fn from_data(arch: Architecture, data: Vec<f64>) -> Result<Self, NeuroError> {
        let manifest = arch.manifest();
        let total = manifest.last().map_or(0, |t| t.offset + t.len);
        if data.len() != total {
            return Err(NeuroError::ShapeMismatch { expected: total, found: data.len() });
        }
        let offsets = Offsets::new(&manifest, arch.layers);
        Ok(Self { arch, manifest, data, offsets })
    }

    pub fn n_params(&self) -> usize {
        self.data.len()
    }

    pub fn tensor(&self, name: &str) -> Option<&[f64]> {
        self.manifest.iter().find(|t| t.name == name).map(|t| &self.data[t.range()])
    }

    pub fn tensor_mut(&mut self, name: &str) -> Option<&mut [f64]> {
        let r = self.manifest.iter().find(|t| t.name == name)?.range();
        Some(&mut self.data[r])
    }

    pub fn layer(&self, l: usize) -> LayerParams {
        let dims = self.arch.layer_dims(l);
        let (w, a) = self.offsets.layers[l];
        LayerParams {
            dims,
            weight: self.data[w..w + dims.weight_len()].to_vec(),
            attn: self.data[a..a + dims.attn_len()].to_vec(),
        }
    }

    /// SHA-256 of the little-endian parameter bytes, hex encoded.
    pub fn checksum(&self) -> String {
        let mut h = Sha256::new();
        for x in &self.data {
            h.update(x.to_le_bytes());
        }
        hex(&h.finalize())
    }

    /// The typed counterpart of an untyped model, every edge type aliased to
    /// the shared parameters. Typed models are returned unchanged.
    pub fn to_typed(&self) -> ModelParams {
        if self.arch.variant.is_typed() {
            return self.clone();
        }
        let variant = if self.arch.variant.is_dynamic() { Variant::Etagatv2 } else { Variant::Etagat };
        let arch = Architecture { variant, ..self.arch };
        let mut out = ModelParams::init(arch, 0);
        for t in &self.manifest {
            let src = &self.data[t.range()];
            let dst_spec = out.manifest.iter().find(|d| d.name == t.name).expect("same names").clone();
            let dst = &mut out.data[dst_spec.range()];
            if dst.len() == src.len() {
                dst.copy_from_slice(src);
            } else {
                for chunk in dst.chunks_mut(src.len()) {
                    chunk.copy_from_slice(src);
                }
            }
        }
        out
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Intermediate values of one forward pass.
#[derive(Clone, Debug)]
pub struct ForwardCache {
    pub layers: Vec<LayerCache>,
    pub z: Vec<f64>,
    a1: Vec<f64>,
    h1: Vec<f64>,
    pub probs: Vec<f64>,
}

impl ForwardCache {
    pub fn final_embeddings(&self) -> &[f64] {
        &self.layers.last().expect("at least one layer").out
    }
}

fn check_input(params: &ModelParams, g: &GraphInput) -> Result<(), NeuroError> {
    if g.d_feat != params.arch.d_feat || g.x.len() != g.n() * g.d_feat {
        return Err(NeuroError::DimMismatch(format!(
            "input has {} features per node, model expects {}",
            g.d_feat, params.arch.d_feat
        )));
    }
    if g.n() == 0 {
        return Err(NeuroError::DimMismatch("graph has no nodes".into()));
    }
    for l in 0..params.arch.layers {
        check_types(&params.arch.layer_dims(l), &g.structure)?;
    }
    if let Some(y) = g.label {
        if y >= params.arch.n_classes {
            return Err(NeuroError::DimMismatch(format!("label {y} outside {} classes", params.arch.n_classes)));
        }
    }
    Ok(())
}

/// Forward pass over one graph. Attention dropout applies when `dropout` is given.
pub fn forward(params: &ModelParams, g: &GraphInput, mut dropout: Option<(f64, &mut Rng)>) -> Result<ForwardCache, NeuroError> {
    check_input(params, g)?;
    let arch = &params.arch;
    let (h, df, n) = (arch.hidden, arch.d_feat, g.n());
    let o = &params.offsets;
    let p = &params.data;

    let mut hcur = vec![0.0; n * h];
    for v in 0..n {
        let xv = &g.x[v * df..(v + 1) * df];
        for j in 0..h {
            hcur[v * h + j] = p[o.embed_b + j] + dot(&p[o.embed_w + j * df..o.embed_w + (j + 1) * df], xv);
        }
    }

    let opts = arch.layer_options();
    let mut layers = Vec::with_capacity(arch.layers);
    for l in 0..arch.layers {
        let dims = arch.layer_dims(l);
        let (wo, ao) = o.layers[l];
        let drop = dropout.as_mut().map(|(rate, rng)| (*rate, &mut **rng));
        let cache = layer::forward(
            &dims,
            &p[wo..wo + dims.weight_len()],
            &p[ao..ao + dims.attn_len()],
            &hcur,
            &g.structure,
            &opts,
            drop,
        );
        hcur = cache.out.clone();
        layers.push(cache);
    }

    let (z, a1, h1, probs) = head(params, &hcur, n);
    Ok(ForwardCache { layers, z, a1, h1, probs })
}

fn head(params: &ModelParams, hfin: &[f64], n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    let arch = &params.arch;
    let h = arch.hidden;
    let o = &params.offsets;
    let p = &params.data;
    let mut z = vec![0.0; h];
    for v in 0..n {
        axpy(1.0, &hfin[v * h..(v + 1) * h], &mut z);
    }
    for zi in &mut z {
        *zi /= n as f64;
    }
    let a1: Vec<f64> = (0..h).map(|j| p[o.b1 + j] + dot(&p[o.w1 + j * h..o.w1 + (j + 1) * h], &z)).collect();
    let h1: Vec<f64> = a1.iter().map(|&x| elu(x)).collect();
    let mut probs: Vec<f64> =
        (0..arch.n_classes).map(|c| p[o.b2 + c] + dot(&p[o.w2 + c * h..o.w2 + (c + 1) * h], &h1)).collect();
    softmax_in_place(&mut probs);
    (z, a1, h1, probs)
}

/// Mean-pool final node embeddings (`n × hidden`) and classify.
pub fn readout_and_classify(params: &ModelParams, h_final: &Matrix) -> Result<Vec<f64>, NeuroError> {
    if h_final.cols != params.arch.hidden || h_final.rows == 0 {
        return Err(NeuroError::DimMismatch("final embeddings must be n × hidden with n ≥ 1".into()));
    }
    Ok(head(params, &h_final.data, h_final.rows).3)
}

/// Class probabilities in evaluation mode.
pub fn predict(params: &ModelParams, g: &GraphInput) -> Result<Vec<f64>, NeuroError> {
    Ok(forward(params, g, None)?.probs)
}

pub fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in p.iter().enumerate() {
        if x > p[best] {
            best = i;
        }
    }
    best
}

/// Accumulate the gradient of `loss_scale · CE(probs, target)` for one graph.
fn backward(params: &ModelParams, g: &GraphInput, cache: &ForwardCache, dlogits: &[f64], grads: &mut [f64]) {
    let arch = &params.arch;
    let (h, df, n) = (arch.hidden, arch.d_feat, g.n());
    let o = &params.offsets;
    let p = &params.data;

    let mut dh1 = vec![0.0; h];
    for (c, &dl) in dlogits.iter().enumerate() {
        axpy(dl, &cache.h1, &mut grads[o.w2 + c * h..o.w2 + (c + 1) * h]);
        grads[o.b2 + c] += dl;
        axpy(dl, &p[o.w2 + c * h..o.w2 + (c + 1) * h], &mut dh1);
    }
    let mut dz = vec![0.0; h];
    for j in 0..h {
        let da = dh1[j] * elu_grad(cache.a1[j]);
        axpy(da, &cache.z, &mut grads[o.w1 + j * h..o.w1 + (j + 1) * h]);
        grads[o.b1 + j] += da;
        axpy(da, &p[o.w1 + j * h..o.w1 + (j + 1) * h], &mut dz);
    }

    let inv_n = 1.0 / n as f64;
    let mut dcur: Vec<f64> = (0..n * h).map(|i| dz[i % h] * inv_n).collect();
    let opts = arch.layer_options();
    for l in (0..arch.layers).rev() {
        let dims = arch.layer_dims(l);
        let (wo, ao) = o.layers[l];
        let (wl, al) = (dims.weight_len(), dims.attn_len());
        let mut dhin = vec![0.0; n * dims.d_in];
        // The weight and attention blocks are disjoint; split to borrow both.
        let (lo, hi) = grads.split_at_mut(ao);
        layer::backward(
            &dims,
            &p[wo..wo + wl],
            &p[ao..ao + al],
            &g.structure,
            &opts,
            &cache.layers[l],
            &dcur,
            &mut lo[wo..wo + wl],
            &mut hi[..al],
            &mut dhin,
        );
        dcur = dhin;
    }

    for v in 0..n {
        let xv = &g.x[v * df..(v + 1) * df];
        for j in 0..h {
            let d = dcur[v * h + j];
            if d != 0.0 {
                axpy(d, xv, &mut grads[o.embed_w + j * df..o.embed_w + (j + 1) * df]);
                grads[o.embed_b + j] += d;
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct BatchResult {
    /// Mean cross-entropy over the batch.
    pub loss: f64,
    /// Gradient of the mean loss, laid out like the parameters.
    pub grads: Vec<f64>,
    /// Predicted class per graph.
    pub predictions: Vec<usize>,
}

impl BatchResult {
    pub fn correct(&self, batch: &[&GraphInput]) -> usize {
        self.predictions.iter().zip(batch).filter(|(p, g)| g.label == Some(**p)).count()
    }
}

/// Mean cross-entropy and its exact gradient over a labelled batch.
pub fn loss_and_grads(
    params: &ModelParams,
    batch: &[&GraphInput],
    label_smoothing: f64,
    mut dropout: Option<(f64, &mut Rng)>,
) -> Result<BatchResult, NeuroError> {
    if batch.is_empty() {
        return Err(NeuroError::EmptyBatch);
    }
    let c = params.arch.n_classes;
    let scale = 1.0 / batch.len() as f64;
    let mut grads = vec![0.0; params.n_params()];
    let mut loss = 0.0;
    let mut predictions = Vec::with_capacity(batch.len());
    for g in batch {
        let y = g.label.ok_or(NeuroError::MissingLabel)?;
        let drop = dropout.as_mut().map(|(rate, rng)| (*rate, &mut **rng));
        let cache = forward(params, g, drop)?;
        let q: Vec<f64> = (0..c)
            .map(|k| label_smoothing / c as f64 + if k == y { 1.0 - label_smoothing } else { 0.0 })
            .collect();
        let l: f64 = -q.iter().zip(&cache.probs).map(|(qk, pk)| if *qk > 0.0 { qk * pk.ln() } else { 0.0 }).sum::<f64>();
        loss += l * scale;
        predictions.push(argmax(&cache.probs));
        let dlogits: Vec<f64> = cache.probs.iter().zip(&q).map(|(pk, qk)| (pk - qk) * scale).collect();
        backward(params, g, &cache, &dlogits, &mut grads);
    }
    if !loss.is_finite() {
        return Err(NeuroError::NonFiniteLoss);
    }
    Ok(BatchResult { loss, grads, predictions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neuro::layer::GraphStructure;

    fn tiny_arch(variant: Variant) -> Architecture {
        Architecture {
            d_feat: 3,
            n_classes: 7,
            n_types: 2,
            hidden: 4,
            heads: 2,
            layers: 2,
            variant,
            residual: false,
            per_type_softmax: false,
            leaky_slope: 0.2,
        }
    }

    fn tiny_graph() -> GraphInput {
        let edges = [(0, 1, 0), (1, 0, 0), (1, 2, 1), (2, 1, 1), (0, 0, 1), (1, 1, 1), (2, 2, 1)];
        GraphInput {
            x: vec![0.1, -0.3, 0.5, 0.7, 0.2, -0.1, -0.4, 0.9, 0.3],
            d_feat: 3,
            structure: GraphStructure::from_edges(3, edges).unwrap(),
            label: Some(2),
        }
    }

    #[test]
    fn manifest_is_contiguous() {
        let m = tiny_arch(Variant::Etagatv2).manifest();
        let mut off = 0;
        for t in &m {
            assert_eq!(t.offset, off);
            off += t.len;
        }
        assert_eq!(m[2].shape, vec![2, 2, 2, 8]);
        assert_eq!(m[4].shape, vec![2, 2, 4, 8]);
        assert_eq!(m[3].shape, vec![2, 2, 2]);
        assert_eq!(tiny_arch(Variant::Gat).manifest()[3].shape, vec![1, 2, 4]);
    }

    #[test]
    fn zero_head_gives_uniform_and_ln7_loss() {
        let mut p = ModelParams::init(tiny_arch(Variant::Gatv2), 1);
        for name in ["mlp.1.weight", "mlp.1.bias"] {
            p.tensor_mut(name).unwrap().fill(0.0);
        }
        let g = tiny_graph();
        let probs = predict(&p, &g).unwrap();
        assert!(probs.iter().all(|&x| (x - 1.0 / 7.0).abs() < 1e-15));
        let r = loss_and_grads(&p, &[&g], 0.0, None).unwrap();
        assert!((r.loss - 7f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn duplicated_batch_leaves_loss_and_grads_unchanged() {
        let p = ModelParams::init(tiny_arch(Variant::Etagat), 3);
        let g = tiny_graph();
        let one = loss_and_grads(&p, &[&g], 0.0, None).unwrap();
        let two = loss_and_grads(&p, &[&g, &g], 0.0, None).unwrap();
        assert!((one.loss - two.loss).abs() < 1e-14);
        for (a, b) in one.grads.iter().zip(&two.grads) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn readout_of_identical_embeddings() {
        let p = ModelParams::init(tiny_arch(Variant::Gat), 2);
        let row = [0.3, -0.2, 0.1, 0.5];
        let many = Matrix::from_vec(3, 4, row.iter().cycle().take(12).copied().collect());
        let one = Matrix::from_vec(1, 4, row.to_vec());
        let (a, b) = (readout_and_classify(&p, &many).unwrap(), readout_and_classify(&p, &one).unwrap());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-15);
        }
        assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn to_typed_preserves_outputs() {
        for v in [Variant::Gat, Variant::Gatv2] {
            let p = ModelParams::init(tiny_arch(v), 5);
            let t = p.to_typed();
            assert!(t.arch.variant.is_typed());
            let g = tiny_graph();
            let (a, b) = (predict(&p, &g).unwrap(), predict(&t, &g).unwrap());
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn unknown_type_is_rejected() {
        let p = ModelParams::init(tiny_arch(Variant::Etagatv2), 1);
        let mut g = tiny_graph();
        g.structure.in_type[0] = 5;
        assert_eq!(predict(&p, &g).unwrap_err(), NeuroError::UnknownType(5));
    }

    #[test]
    fn hyperparam_validation() {
        assert!(Hyperparams::paper(Variant::Etagatv2).validate().is_ok());
        let mut hp = Hyperparams::desk(Variant::Gat);
        hp.heads = 5;
        assert!(hp.validate().is_err());
        hp.heads = 4;
        hp.learning_rate = 0.0;
        assert!(hp.validate().is_err());
    }
}
