// SPDX-License-Identifier: Apache-2.0

//! Independent reference implementations shared by the integration tests and
//! the acceptance harness. Nothing here calls the code paths it checks.

#![allow(dead_code)]

use std::collections::BTreeMap;

use misconf::graph::{NetworkGraph, NodeId};
use misconf::neuro::attention::{attn_gat, attn_gatv2};
use misconf::neuro::layer::{LayerOptions, LayerParams};
use misconf::neuro::model::{loss_and_grads, Architecture, ModelParams};
use misconf::neuro::tensor::Matrix;
use misconf::neuro::{GraphInput, GraphStructure, Variant};
use misconf::protocol::{BgpAttr, Candidate, Configuration};
use misconf::rng::{seeded, Rng};
use rand::Rng as _;

// ---------------------------------------------------------------- routing

/// All-pairs router distances by Floyd–Warshall over directed weights.
pub fn floyd_warshall(graph: &NetworkGraph, config: &Configuration) -> BTreeMap<(NodeId, NodeId), u64> {
    let r = graph.routers();
    let n = r.len();
    let idx: BTreeMap<NodeId, usize> = r.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let inf = u64::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for i in 0..n {
        d[i][i] = 0;
    }
    for (&(a, b), &w) in &config.ospf_weights {
        if let (Some(&i), Some(&j)) = (idx.get(&a), idx.get(&b)) {
            d[i][j] = d[i][j].min(w as u64);
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    let mut out = BTreeMap::new();
    for i in 0..n {
        for j in 0..n {
            if d[i][j] < inf {
                out.insert((r[i], r[j]), d[i][j]);
            }
        }
    }
    out
}

/// Best route by sorting all candidates with a comparator written out step
/// by step.
pub fn bgp_sort_oracle(cands: &[Candidate], igp_cost: impl Fn(NodeId) -> u64) -> Option<(NodeId, NodeId)> {
    let mut v: Vec<&Candidate> = cands.iter().collect();
    v.sort_by(|x, y| {
        let (a, b) = (&x.attrs, &y.attrs);
        b.get(BgpAttr::CiscoWeight)
            .cmp(&a.get(BgpAttr::CiscoWeight))
            .then(b.get(BgpAttr::LocalPref).cmp(&a.get(BgpAttr::LocalPref)))
            .then(a.get(BgpAttr::AsPathLen).cmp(&b.get(BgpAttr::AsPathLen)))
            .then(a.get(BgpAttr::Origin).cmp(&b.get(BgpAttr::Origin)))
            .then(a.get(BgpAttr::Med).cmp(&b.get(BgpAttr::Med)))
            .then(igp_cost(x.gateway).cmp(&igp_cost(y.gateway)))
            .then(a.get(BgpAttr::ExasIndex).cmp(&b.get(BgpAttr::ExasIndex)))
            .then(x.gateway.cmp(&y.gateway))
    });
    v.first().map(|c| (c.exas, c.gateway))
}

/// Rule-based diagnosis recomputed exactly from a raw list of violation
/// kinds, with weights given in hundredths. Returns the winning class index,
/// the integer score numerators (over `100 · kinds.len()`) and the tie flag.
pub fn rb_brute_force(kinds: &[usize], cents: &[[u32; 3]; 7]) -> (usize, [u64; 7], bool) {
    let mut num = [0u64; 7];
    for f in 0..7 {
        for &k in kinds {
            num[f] += cents[f][k] as u64;
        }
    }
    let mut best = 0;
    for f in 0..7 {
        if num[f] > num[best] {
            best = f;
        }
    }
    let tie = (0..7).filter(|&f| num[f] == num[best]).count() > 1;
    (best, num, tie)
}

// ---------------------------------------------------------------- neural

pub fn random_structure(rng: &mut Rng, n: usize, n_types: usize, extra_edges: usize) -> Vec<(usize, usize, usize)> {
    let self_type = n_types - 1;
    let mut edges: Vec<(usize, usize, usize)> = (0..n).map(|v| (v, v, self_type)).collect();
    while edges.len() < n + extra_edges {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let t = rng.gen_range(0..n_types.max(2) - 1);
        if u != v && !edges.contains(&(u, v, t)) {
            edges.push((u, v, t));
        }
    }
    edges
}

pub fn random_input(rng: &mut Rng, n: usize, d_feat: usize, n_types: usize, n_classes: usize) -> GraphInput {
    let edges = random_structure(rng, n, n_types, 2 * n);
    GraphInput {
        x: (0..n * d_feat).map(|_| rng.gen_range(-1.5..1.5)).collect(),
        d_feat,
        structure: GraphStructure::from_edges(n, edges).unwrap(),
        label: Some(rng.gen_range(0..n_classes)),
    }
}

pub fn small_arch(variant: Variant, residual: bool, per_type_softmax: bool) -> Architecture {
    Architecture {
        d_feat: 10,
        n_classes: 7,
        n_types: 4,
        hidden: 8,
        heads: 2,
        layers: 2,
        variant,
        residual,
        per_type_softmax,
        leaky_slope: 0.2,
    }
}

/// Perturb all parameters with noise so biases and heads are non-trivial.
pub fn jitter(params: &mut ModelParams, rng: &mut Rng, scale: f64) {
    for x in &mut params.data {
        *x += rng.gen_range(-scale..scale);
    }
}

#[derive(Debug, Default, Clone)]
pub struct FdReport {
    pub checked: usize,
    /// Entries that needed the smaller step (kink nearby).
    pub retried: usize,
    pub failures: Vec<(usize, f64, f64)>,
    pub max_rel_err: f64,
}

/// Central differences with Richardson extrapolation:
/// `(4·D(ε/2) − D(ε)) / 3`, accurate to `O(ε⁴)`.
fn richardson(f: &mut dyn FnMut(f64) -> f64, eps: f64) -> f64 {
    let d = |f: &mut dyn FnMut(f64) -> f64, h: f64| (f(h) - f(-h)) / (2.0 * h);
    let d1 = d(f, eps);
    let d2 = d(f, eps / 2.0);
    (4.0 * d2 - d1) / 3.0
}

fn close(a: f64, n: f64, rel: f64, abs: f64) -> bool {
    let diff = (a - n).abs();
    diff <= rel * a.abs().max(n.abs()) || diff <= abs
}

/// Compare every analytic gradient entry with finite differences of the
/// mean loss. Dropout masks are fixed by reseeding the same generator for
/// every evaluation.
pub fn fd_check(params: &ModelParams, batch: &[&GraphInput], smoothing: f64, dropout: Option<(f64, u64)>, rel: f64) -> FdReport {
    let eval = |p: &ModelParams| -> misconf::neuro::model::BatchResult {
        match dropout {
            Some((rate, seed)) => {
                let mut rng = seeded(seed);
                loss_and_grads(p, batch, smoothing, Some((rate, &mut rng))).unwrap()
            }
            None => loss_and_grads(p, batch, smoothing, None).unwrap(),
        }
    };
    let analytic = eval(params).grads;
    let mut work = params.clone();
    let mut report = FdReport::default();
    for i in 0..params.n_params() {
        let base = params.data[i];
        let mut f = |h: f64| {
            work.data[i] = base + h;
            let l = eval(&work).loss;
            work.data[i] = base;
            l
        };
        let a = analytic[i];
        let mut num = richardson(&mut f, 1e-4);
        let mut ok = close(a, num, rel, 1e-10);
        if !ok {
            report.retried += 1;
            num = richardson(&mut f, 1e-6);
            ok = close(a, num, rel, 1e-9);
        }
        let diff = (a - num).abs();
        let scale = a.abs().max(num.abs());
        if diff > 1e-10 && scale > 0.0 {
            report.max_rel_err = report.max_rel_err.max(diff / scale);
        }
        report.checked += 1;
        if !ok {
            report.failures.push((i, a, num));
        }
    }
    report
}

/// Straight-line layer reference: per target node, per head, loop over its
/// incoming edges, score each with the standalone attention functions,
/// normalise, aggregate and activate.
pub fn naive_layer(hin: &Matrix, edges: &[(usize, usize, usize)], lp: &LayerParams, opts: &LayerOptions) -> Matrix {
    let d = lp.dims;
    let n = hin.rows;
    let mut out = Matrix::zeros(n, d.d_out());
    for v in 0..n {
        let mut per_head: Vec<Vec<f64>> = Vec::new();
        for k in 0..d.heads {
            let incoming: Vec<(usize, usize)> = {
                let mut e: Vec<(usize, usize)> = edges.iter().filter(|e| e.1 == v).map(|e| (e.2, e.0)).collect();
                e.sort();
                e.into_iter().map(|(t, u)| (u, t)).collect()
            };
            let slot_of = |t: usize| if d.slots == 1 { 0 } else { t };
            let mut scores = Vec::new();
            for &(u, t) in &incoming {
                let s = slot_of(t);
                let w = lp.w_matrix(s, k);
                let a = lp.a_vector(s, k);
                let e = if d.dynamic {
                    attn_gatv2(hin.row(u), hin.row(v), &w, a, opts.slope).unwrap()
                } else {
                    attn_gat(hin.row(u), hin.row(v), &w, a, opts.slope).unwrap()
                };
                scores.push(e);
            }
            let groups: Vec<Vec<usize>> = if opts.per_type_softmax {
                let mut g: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
                for (i, &(_, t)) in incoming.iter().enumerate() {
                    g.entry(t).or_default().push(i);
                }
                g.into_values().collect()
            } else {
                vec![(0..incoming.len()).collect()]
            };
            let mut alpha = vec![0.0; incoming.len()];
            for grp in groups {
                let mx = grp.iter().map(|&i| scores[i]).fold(f64::NEG_INFINITY, f64::max);
                let z: f64 = grp.iter().map(|&i| (scores[i] - mx).exp()).sum();
                for &i in &grp {
                    alpha[i] = (scores[i] - mx).exp() / z;
                }
            }
            let mut m = vec![0.0; d.d_head];
            for (i, &(u, t)) in incoming.iter().enumerate() {
                let w = lp.w_matrix(slot_of(t), k);
                for r in 0..d.d_head {
                    let mut acc = 0.0;
                    for j in 0..d.d_in {
                        acc += w.get(r, j) * hin.get(u, j);
                    }
                    m[r] += alpha[i] * acc;
                }
            }
            per_head.push(m);
        }
        let elu = |x: f64| if x > 0.0 { x } else { x.exp() - 1.0 };
        if d.concat {
            for (k, m) in per_head.iter().enumerate() {
                for r in 0..d.d_head {
                    out.set(v, k * d.d_head + r, elu(m[r]));
                }
            }
        } else {
            for r in 0..d.d_head {
                let mean = per_head.iter().map(|m| m[r]).sum::<f64>() / d.heads as f64;
                out.set(v, r, elu(mean));
            }
        }
        if opts.residual {
            for j in 0..d.d_out() {
                out.set(v, j, out.get(v, j) + hin.get(v, j));
            }
        }
    }
    out
}

/// Scalar Adam written from the textbook update rule.
pub struct ScalarAdam {
    m: f64,
    v: f64,
    t: i32,
}

impl ScalarAdam {
    pub fn new() -> Self {
        Self { m: 0.0, v: 0.0, t: 0 }
    }

    pub fn step(&mut self, p: f64, g: f64, lr: f64, wd: f64) -> f64 {
        self.t += 1;
        self.m = 0.9 * self.m + 0.1 * g;
        self.v = 0.999 * self.v + 0.001 * g * g;
        let mhat = self.m / (1.0 - 0.9f64.powi(self.t));
        let vhat = self.v / (1.0 - 0.999f64.powi(self.t));
        p - lr * (mhat / (vhat.sqrt() + 1e-8)) - lr * wd * p
    }
}
