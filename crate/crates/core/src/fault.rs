// SPDX-License-Identifier: Apache-2.0

//! Template-wide misconfiguration injection and labelled sample datasets.
//!
//! A fault shifts one configuration template by an integer offset, and the
//! shift reaches every device instantiating that template. Faults can be
//! injected into a [`Configuration`] (then executed and checked against
//! specifications) or directly into the node feature matrix.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{
    generate_synthetic, message_passing_edges, Edge, EdgeType, GraphError, IntRange, NetworkGraph, NodeId, NodeRole,
    RouterCore, TopologyParams,
};
use crate::graphml::attach_core;
use crate::protocol::{prot, BgpAttr, BgpAttrs, Configuration, ProtocolError, PHI_MAX};
use crate::rng::{derive_seed, seeded, Rng};
use crate::specs::{diff_specs, f_check, generate_queries_clamped};

/// Number of node features: three role indicators plus seven template columns.
pub const N_FEATURES: usize = 10;
/// Number of fault classes a classifier chooses among.
pub const N_CLASSES: usize = 7;
/// Offsets are drawn uniformly from this inclusive range.
pub const DELTA_RANGE: (u32, u32) = (1, 4);

/// Base ranges of the first five BGP attributes; `exas_index` is the
/// ordinal of the external AS.
pub const BGP_RANGES: [(u32, u32); 5] = [(50, 150), (0, 20), (0, 2), (1, 6), (0, 10)];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FaultError {
    #[error("f0 is the fault-free class and cannot be injected")]
    NoFault,
    #[error("offset {0} is outside [{lo}, {hi}]", lo = DELTA_RANGE.0, hi = DELTA_RANGE.1)]
    BadDelta(u32),
    #[error("unknown fault class {0:?}")]
    UnknownClass(String),
    #[error("at least {N_CLASSES} samples are needed for a balanced dataset, got {0}")]
    TooFewSamples(usize),
    #[error("dataset format error: {0}")]
    Format(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

/// `F0` is the fault-free class, `F1` the OSPF weight template and `F2..F7`
/// the six BGP attribute templates in [`BgpAttr`] order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FaultClass {
    F0,
    F1,
    F2,
    F3,
    F4,
    F5,
    F6,
    F7,
}

impl FaultClass {
    pub const ALL: [FaultClass; 8] = [
        FaultClass::F0,
        FaultClass::F1,
        FaultClass::F2,
        FaultClass::F3,
        FaultClass::F4,
        FaultClass::F5,
        FaultClass::F6,
        FaultClass::F7,
    ];
    /// The classifier label space.
    pub const FAULTS: [FaultClass; 7] = [
        FaultClass::F1,
        FaultClass::F2,
        FaultClass::F3,
        FaultClass::F4,
        FaultClass::F5,
        FaultClass::F6,
        FaultClass::F7,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Classifier label in `0..7`; `None` for `F0`.
    pub fn label(self) -> Option<usize> {
        self.index().checked_sub(1)
    }

    pub fn from_label(label: usize) -> Option<FaultClass> {
        Self::FAULTS.get(label).copied()
    }

    /// The feature column this template's values live in.
    pub fn column(self) -> Option<usize> {
        self.label().map(|l| 3 + l)
    }

    pub fn bgp_attr(self) -> Option<BgpAttr> {
        self.index().checked_sub(2).map(|i| BgpAttr::ALL[i])
    }

    pub fn name(self) -> &'static str {
        ["f0", "f1", "f2", "f3", "f4", "f5", "f6", "f7"][self.index()]
    }

    pub fn template(self) -> &'static str {
        match self {
            FaultClass::F0 => "none",
            FaultClass::F1 => "ospf_weight",
            other => other.bgp_attr().expect("BGP class").name(),
        }
    }
}

impl FromStr for FaultClass {
    type Err = FaultError;

    fn from_str(s: &str) -> Result<Self, FaultError> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| FaultError::UnknownClass(s.to_string()))
    }
}

impl Serialize for FaultClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for FaultClass {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Draw a fault-free configuration: symmetric OSPF weights uniform in
/// `[1, 32]` and BGP attributes uniform in [`BGP_RANGES`].
pub fn sample_true_config(graph: &NetworkGraph, seed: u64) -> Configuration {
    let mut rng = seeded(seed);
    let mut ospf_weights = BTreeMap::new();
    for (a, b) in graph.ospf_links() {
        let w = rng.gen_range(1..=PHI_MAX);
        ospf_weights.insert((a, b), w);
        ospf_weights.insert((b, a), w);
    }
    let mut bgp_attrs = BTreeMap::new();
    for (&k, ms) in graph.dst_attachment() {
        for &m in ms {
            let mut a = [0u32; 6];
            for (slot, &(lo, hi)) in a.iter_mut().zip(&BGP_RANGES) {
                *slot = rng.gen_range(lo..=hi);
            }
            a[BgpAttr::ExasIndex.index()] = graph.exas_ordinal(m).expect("attached node is an external AS") as u32;
            bgp_attrs.insert((m, k), BgpAttrs(a));
        }
    }
    Configuration { ospf_weights, bgp_attrs, phi_max: PHI_MAX }
}

pub fn sample_delta(rng: &mut Rng) -> u32 {
    rng.gen_range(DELTA_RANGE.0..=DELTA_RANGE.1)
}

fn check_delta(delta: u32) -> Result<(), FaultError> {
    if (DELTA_RANGE.0..=DELTA_RANGE.1).contains(&delta) {
        Ok(())
    } else {
        Err(FaultError::BadDelta(delta))
    }
}

/// Inject a template fault with an offset drawn from `seed`. Returns the
/// faulty configuration and the offset used.
pub fn inject_config_fault(config: &Configuration, f: FaultClass, seed: u64) -> Result<(Configuration, u32), FaultError> {
    let delta = sample_delta(&mut seeded(seed));
    Ok((inject_config_fault_with(config, f, delta)?, delta))
}

/// Shift every instance of the template `f` by `delta`. OSPF weights are
/// clamped to `phi_max`; BGP attributes are shifted as raw integers.
pub fn inject_config_fault_with(config: &Configuration, f: FaultClass, delta: u32) -> Result<Configuration, FaultError> {
    check_delta(delta)?;
    let mut out = config.clone();
    match f {
        FaultClass::F0 => return Err(FaultError::NoFault),
        FaultClass::F1 => {
            for w in out.ospf_weights.values_mut() {
                *w = (*w + delta).clamp(1, out.phi_max);
            }
        }
        other => {
            let attr = other.bgp_attr().expect("BGP class");
            for a in out.bgp_attrs.values_mut() {
                a.set(attr, a.get(attr) + delta);
            }
        }
    }
    Ok(out)
}

/// Provenance of a sample.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleMeta {
    /// Seed the topology was generated from.
    pub graph_id: u64,
    /// Per-sample seed all other randomness derives from.
    pub seed: u64,
    pub delta: Option<u32>,
    /// Whether the injected fault violated any specification (config-level
    /// samples only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_check: Option<bool>,
    /// Violations per kind `(fwd, reach, iso)` (config-level samples only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violations: Option<[usize; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology: Option<String>,
}

/// One labelled graph: `n × 10` features, the message-passing edge list and
/// the fault class.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphSample {
    /// Row-major `n_nodes × N_FEATURES`.
    pub features: Vec<f64>,
    pub n_nodes: usize,
    pub edges: Vec<Edge>,
    pub label: FaultClass,
    pub meta: SampleMeta,
}

impl GraphSample {
    pub fn row(&self, v: NodeId) -> &[f64] {
        &self.features[v * N_FEATURES..(v + 1) * N_FEATURES]
    }

    pub fn column(&self, c: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_nodes).map(move |v| self.features[v * N_FEATURES + c])
    }

    pub fn roles_one_hot(&self, v: NodeId) -> [f64; 3] {
        let r = self.row(v);
        [r[0], r[1], r[2]]
    }
}

/// Node feature matrix of a graph under a configuration.
pub fn node_features(graph: &NetworkGraph, config: &Configuration) -> Vec<f64> {
    let n = graph.node_count();
    let mut x = vec![0.0; n * N_FEATURES];

    let mut global = [0.0f64; 6];
    for a in config.bgp_attrs.values() {
        for (g, &v) in global.iter_mut().zip(&a.0) {
            *g += v as f64;
        }
    }
    if !config.bgp_attrs.is_empty() {
        for g in &mut global {
            *g /= config.bgp_attrs.len() as f64;
        }
    }

    let mut per_exas: BTreeMap<NodeId, ([f64; 6], usize)> = BTreeMap::new();
    for (&(m, _), a) in &config.bgp_attrs {
        let e = per_exas.entry(m).or_insert(([0.0; 6], 0));
        for (s, &v) in e.0.iter_mut().zip(&a.0) {
            *s += v as f64;
        }
        e.1 += 1;
    }

    for v in 0..n {
        let row = &mut x[v * N_FEATURES..(v + 1) * N_FEATURES];
        let role = graph.role(v);
        row[match role {
            NodeRole::Router { .. } => 0,
            NodeRole::Dst => 1,
            NodeRole::Exas => 2,
        }] = 1.0;
        if role.is_router() {
            let nbrs = graph.ospf_neighbors(v);
            if !nbrs.is_empty() {
                let sum: f64 = nbrs.iter().map(|&u| config.weight(v, u).unwrap_or(0) as f64).sum();
                row[3] = sum / nbrs.len() as f64;
            }
        }
        let attrs = match per_exas.get(&v) {
            Some((sum, cnt)) if role == NodeRole::Exas => sum.map(|s| s / *cnt as f64),
            _ => global,
        };
        row[4..].copy_from_slice(&attrs);
    }
    x
}

/// Build a sample from a graph and the configuration it runs.
pub fn build_sample(graph: &NetworkGraph, config: &Configuration, label: FaultClass) -> GraphSample {
    GraphSample {
        features: node_features(graph, config),
        n_nodes: graph.node_count(),
        edges: message_passing_edges(graph),
        label,
        meta: SampleMeta { graph_id: 0, seed: 0, delta: None, f_check: None, violations: None, topology: None },
    }
}

/// Feature-level injection: add `delta` to the template column of every
/// node and relabel.
pub fn perturb_features(sample: &GraphSample, f: FaultClass, delta: u32) -> Result<GraphSample, FaultError> {
    check_delta(delta)?;
    let col = f.column().ok_or(FaultError::NoFault)?;
    let mut out = sample.clone();
    shift_column(&mut out, col, delta as f64);
    out.label = f;
    out.meta.delta = Some(delta);
    Ok(out)
}

/// Add `by` to one feature column of every node.
pub fn shift_column(sample: &mut GraphSample, col: usize, by: f64) {
    for v in 0..sample.n_nodes {
        sample.features[v * N_FEATURES + col] += by;
    }
}

/// How faults are injected when building a dataset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetMode {
    /// Inject into the configuration, execute it, and record the
    /// specification check alongside the sample.
    Pregenerated,
    /// Shift the feature column directly; no protocol execution.
    OnTheFly,
}

impl FromStr for DatasetMode {
    type Err = FaultError;

    fn from_str(s: &str) -> Result<Self, FaultError> {
        match s {
            "pregenerated" => Ok(DatasetMode::Pregenerated),
            "on_the_fly" | "on-the-fly" => Ok(DatasetMode::OnTheFly),
            other => Err(FaultError::Format(format!("unknown dataset mode {other:?}"))),
        }
    }
}

/// Where sample topologies come from.
#[derive(Clone, Debug, PartialEq)]
pub enum TopologySource {
    Synthetic(TopologyParams),
    /// Parsed router cores (with names) plus attachment parameters.
    Zoo { cores: Vec<(String, RouterCore)>, params: TopologyParams },
}

impl TopologySource {
    pub fn params(&self) -> &TopologyParams {
        match self {
            TopologySource::Synthetic(p) => p,
            TopologySource::Zoo { params, .. } => params,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            TopologySource::Synthetic(_) => "synthetic".into(),
            TopologySource::Zoo { cores, .. } => format!("zoo:{}", cores.len()),
        }
    }

    /// Check the parameters against the networks this source can produce.
    /// For Zoo sources the router range is taken from the loaded cores.
    pub fn validate(&self) -> Result<(), FaultError> {
        match self {
            TopologySource::Synthetic(p) => Ok(p.validate()?),
            TopologySource::Zoo { cores, params } => {
                let lo = cores.iter().map(|(_, c)| c.n as u32).min();
                let hi = cores.iter().map(|(_, c)| c.n as u32).max();
                match (lo, hi) {
                    (Some(lo), Some(hi)) => Ok(TopologyParams { router_range: IntRange::new(lo, hi), ..params.clone() }.validate()?),
                    _ => Err(GraphError::InfeasibleParams("no Topology Zoo networks loaded".into()).into()),
                }
            }
        }
    }

    /// A topology for the given seed, with an optional name.
    pub fn topology(&self, seed: u64) -> Result<(NetworkGraph, Option<String>), FaultError> {
        match self {
            TopologySource::Synthetic(p) => Ok((generate_synthetic(&p.with_seed(seed))?, None)),
            TopologySource::Zoo { cores, params } => {
                if cores.is_empty() {
                    return Err(GraphError::InfeasibleParams("no Topology Zoo networks loaded".into()).into());
                }
                let pick = seeded(seed).gen_range(0..cores.len());
                let (name, core) = &cores[pick];
                let g = attach_core(core, &params.with_seed(derive_seed(seed, 1)))?;
                Ok((g, Some(name.clone())))
            }
        }
    }
}

/// Stratified labels: consecutive blocks of seven samples each hold one
/// sample per class in a seeded order.
pub fn stratified_label(seed: u64, index: u64) -> FaultClass {
    let block = index / N_CLASSES as u64;
    let mut order = FaultClass::FAULTS;
    order.shuffle(&mut seeded(derive_seed(seed ^ 0x5eed_1abe, block)));
    order[(index % N_CLASSES as u64) as usize]
}

/// Build sample `index` of the stream defined by `(source, mode, seed)`.
/// Samples depend only on these inputs, so any subset can be rebuilt
/// independently and in any order.
pub fn make_sample(source: &TopologySource, mode: DatasetMode, seed: u64, index: u64) -> Result<GraphSample, FaultError> {
    let s = derive_seed(seed, index);
    let label = stratified_label(seed, index);
    let graph_id = derive_seed(s, 0);
    let (graph, topology) = source.topology(graph_id)?;
    let config = sample_true_config(&graph, derive_seed(s, 1));
    let mut sample = match mode {
        DatasetMode::OnTheFly => {
            let delta = sample_delta(&mut seeded(derive_seed(s, 3)));
            perturb_features(&build_sample(&graph, &config, FaultClass::F0), label, delta)?
        }
        DatasetMode::Pregenerated => {
            let qc = source.params().query_counts;
            let mut qrng = seeded(derive_seed(s, 2));
            let counts = [qc.fwd.sample(&mut qrng) as usize, qc.reach.sample(&mut qrng) as usize, qc.iso.sample(&mut qrng) as usize];
            let (queries, _) = generate_queries_clamped(&graph, &config, counts, derive_seed(s, 4))?;
            let (faulty, delta) = inject_config_fault(&config, label, derive_seed(s, 3))?;
            let observed = prot(&graph, &faulty, &queries)?;
            let alarm = f_check(&queries, &observed).map_err(ProtocolError::from)?;
            let delta_s = diff_specs(&queries, &observed).map_err(ProtocolError::from)?;
            let mut sample = build_sample(&graph, &faulty, label);
            sample.meta.delta = Some(delta);
            sample.meta.f_check = Some(alarm);
            sample.meta.violations = Some(delta_s.kind_counts());
            sample
        }
    };
    sample.meta.graph_id = graph_id;
    sample.meta.seed = s;
    sample.meta.topology = topology;
    Ok(sample)
}

/// Infinite sample stream; sample `i` equals `make_sample(.., i)`.
pub fn sample_stream(source: TopologySource, mode: DatasetMode, seed: u64) -> impl Iterator<Item = Result<GraphSample, FaultError>> {
    (0u64..).map(move |i| make_sample(&source, mode, seed, i))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub samples: Vec<GraphSample>,
    pub header: DatasetHeader,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub format: String,
    pub version: u32,
    pub n_samples: usize,
    pub seed: u64,
    pub mode: DatasetMode,
    pub source: String,
    pub params: TopologyParams,
    /// Sample counts for `f1..f7`.
    pub class_histogram: [usize; N_CLASSES],
}

pub const DATASET_FORMAT: &str = "misconf-dataset";
pub const DATASET_VERSION: u32 = 1;

/// Build `n` samples with balanced labels (per-class counts differ by at most one).
pub fn make_dataset(source: &TopologySource, n: usize, mode: DatasetMode, seed: u64) -> Result<Dataset, FaultError> {
    if n < N_CLASSES {
        return Err(FaultError::TooFewSamples(n));
    }
    source.validate()?;
    let samples = (0..n as u64)
        .map(|i| make_sample(source, mode, seed, i))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Dataset::from_samples(samples, seed, mode, source))
}

pub fn class_histogram(samples: &[GraphSample]) -> [usize; N_CLASSES] {
    let mut h = [0; N_CLASSES];
    for s in samples {
        if let Some(l) = s.label.label() {
            h[l] += 1;
        }
    }
    h
}

#[derive(Serialize, Deserialize)]
struct SampleLine {
    index: usize,
    label: FaultClass,
    n_nodes: usize,
    features: Vec<Vec<f64>>,
    edges: Vec<(NodeId, NodeId, EdgeType)>,
    meta: SampleMeta,
}

impl Dataset {
    pub fn from_samples(samples: Vec<GraphSample>, seed: u64, mode: DatasetMode, source: &TopologySource) -> Self {
        let header = DatasetHeader {
            format: DATASET_FORMAT.into(),
            version: DATASET_VERSION,
            n_samples: samples.len(),
            seed,
            mode,
            source: source.describe(),
            params: source.params().clone(),
            class_histogram: class_histogram(&samples),
        };
        Self { samples, header }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// JSON Lines: a header line, then one sample per line.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        serde_json::to_writer(&mut w, &self.header)?;
        w.write_all(b"\n")?;
        for (index, s) in self.samples.iter().enumerate() {
            let line = SampleLine {
                index,
                label: s.label,
                n_nodes: s.n_nodes,
                features: s.features.chunks(N_FEATURES).map(<[f64]>::to_vec).collect(),
                edges: s.edges.iter().map(|e| (e.src, e.dst, e.kind)).collect(),
                meta: s.meta.clone(),
            };
            serde_json::to_writer(&mut w, &line)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self, FaultError> {
        let fmt = |e: &dyn std::fmt::Display| FaultError::Format(e.to_string());
        let mut lines = r.lines();
        let first = lines.next().ok_or_else(|| FaultError::Format("empty dataset file".into()))?;
        let header: DatasetHeader = serde_json::from_str(&first.map_err(|e| fmt(&e))?).map_err(|e| fmt(&e))?;
        if header.format != DATASET_FORMAT || header.version != DATASET_VERSION {
            return Err(FaultError::Format(format!("unsupported format {} v{}", header.format, header.version)));
        }
        let mut samples = Vec::with_capacity(header.n_samples);
        for (i, line) in lines.enumerate() {
            let line = line.map_err(|e| fmt(&e))?;
            if line.trim().is_empty() {
                continue;
            }
            let l: SampleLine = serde_json::from_str(&line).map_err(|e| fmt(&e))?;
            if l.index != i || l.features.len() != l.n_nodes || l.features.iter().any(|r| r.len() != N_FEATURES) {
                return Err(FaultError::Format(format!("malformed sample line {i}")));
            }
            if l.edges.iter().any(|&(s, d, _)| s >= l.n_nodes || d >= l.n_nodes) {
                return Err(FaultError::Format(format!("edge out of range on sample line {i}")));
            }
            samples.push(GraphSample {
                features: l.features.concat(),
                n_nodes: l.n_nodes,
                edges: l.edges.into_iter().map(|(s, d, k)| Edge::new(s, d, k)).collect(),
                label: l.label,
                meta: l.meta,
            });
        }
        if samples.len() != header.n_samples || class_histogram(&samples) != header.class_histogram {
            return Err(FaultError::Format("header does not match the samples".into()));
        }
        Ok(Self { samples, header })
    }
}
