// SPDX-License-Identifier: Apache-2.0

//! Typed network graphs.
//!
//! A [`NetworkGraph`] holds three kinds of nodes: internal routers (some of
//! them gateways), external ASes and destination networks. Raw graphs carry
//! only physical adjacencies: OSPF links between routers and eBGP sessions
//! between a gateway and an external AS. Destination networks hang off
//! external ASes through `dst_attachment`. The iBGP mesh and self-loops are
//! derived by [`augment`] for message passing.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::seq::index::sample;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::rng::{seeded, Rng};

pub type NodeId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("node ids must be exactly 0..{0} with no duplicates")]
    InvalidNodeIds(usize),
    #[error("edge references unknown node {0}")]
    UnknownNode(NodeId),
    #[error("duplicate {kind:?} edge between {src} and {dst}")]
    DuplicateEdge { src: NodeId, dst: NodeId, kind: EdgeType },
    #[error("{kind:?} edge ({src}, {dst}) is incompatible with its endpoint roles")]
    RoleViolation { src: NodeId, dst: NodeId, kind: EdgeType },
    #[error("{0:?} edges are derived during augmentation and cannot appear in a raw graph")]
    DerivedEdgeType(EdgeType),
    #[error("destination {0} is not attached to any external AS")]
    DanglingDst(NodeId),
    #[error("external AS {0} has no eBGP session to a gateway router")]
    OrphanExas(NodeId),
    #[error("graph has no gateway router")]
    NoGateway,
    #[error("graph has no routers")]
    NoRouters,
    #[error("the router OSPF subgraph is not connected")]
    DisconnectedRouters,
    #[error("infeasible topology parameters: {0}")]
    InfeasibleParams(String),
    #[error("graph parse error: {0}")]
    Parse(String),
    #[error("graph has no nodes")]
    EmptyGraph,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeRole {
    Router { gateway: bool },
    Dst,
    Exas,
}

impl NodeRole {
    pub fn is_router(self) -> bool {
        matches!(self, NodeRole::Router { .. })
    }

    pub fn is_gateway(self) -> bool {
        matches!(self, NodeRole::Router { gateway: true })
    }

    fn name(self) -> &'static str {
        match self {
            NodeRole::Router { .. } => "router",
            NodeRole::Dst => "dst",
            NodeRole::Exas => "exas",
        }
    }
}

/// Edge tags. The declaration order is the canonical sort order of
/// augmented edge lists.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeType {
    Ospf,
    Ebgp,
    Ibgp,
    #[serde(rename = "self")]
    SelfLoop,
}

impl EdgeType {
    pub const ALL: [EdgeType; 4] = [EdgeType::Ospf, EdgeType::Ebgp, EdgeType::Ibgp, EdgeType::SelfLoop];
    pub const COUNT: usize = 4;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<EdgeType> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            EdgeType::Ospf => "ospf",
            EdgeType::Ebgp => "ebgp",
            EdgeType::Ibgp => "ibgp",
            EdgeType::SelfLoop => "self",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub src: NodeId,
    pub dst: NodeId,
    pub kind: EdgeType,
}

impl Edge {
    pub fn new(src: NodeId, dst: NodeId, kind: EdgeType) -> Self {
        Self { src, dst, kind }
    }

    fn sort_key(&self) -> (EdgeType, NodeId, NodeId) {
        (self.kind, self.src, self.dst)
    }
}

/// Inclusive integer interval used by topology presets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "[u32; 2]", into = "[u32; 2]")]
pub struct IntRange {
    pub lo: u32,
    pub hi: u32,
}

impl IntRange {
    pub const fn new(lo: u32, hi: u32) -> Self {
        Self { lo, hi }
    }

    pub const fn exactly(v: u32) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn contains(&self, v: u32) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn sample(&self, rng: &mut Rng) -> u32 {
        rng.gen_range(self.lo..=self.hi)
    }

    pub fn scaled(&self, factor: u32) -> Self {
        Self::new(self.lo * factor, self.hi * factor)
    }
}

impl From<[u32; 2]> for IntRange {
    fn from(v: [u32; 2]) -> Self {
        Self::new(v[0], v[1])
    }
}

impl From<IntRange> for [u32; 2] {
    fn from(r: IntRange) -> Self {
        [r.lo, r.hi]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryRanges {
    pub fwd: IntRange,
    pub reach: IntRange,
    pub iso: IntRange,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologyParams {
    pub router_range: IntRange,
    pub dst_range: IntRange,
    pub gateway_count: IntRange,
    pub query_counts: QueryRanges,
    pub seed: u64,
}

impl TopologyParams {
    /// Moderate synthetic networks used for training.
    pub fn baseline() -> Self {
        Self {
            router_range: IntRange::new(16, 23),
            dst_range: IntRange::new(4, 7),
            gateway_count: IntRange::exactly(3),
            query_counts: QueryRanges {
                fwd: IntRange::new(8, 12),
                reach: IntRange::new(4, 7),
                iso: IntRange::new(10, 30),
            },
            seed: 0,
        }
    }

    /// Expanded synthetic networks for zero-shot evaluation.
    pub fn larger_scale() -> Self {
        Self {
            router_range: IntRange::new(24, 31),
            dst_range: IntRange::new(10, 15),
            gateway_count: IntRange::new(7, 9),
            query_counts: QueryRanges {
                fwd: IntRange::new(25, 35),
                reach: IntRange::new(15, 20),
                iso: IntRange::new(10, 30),
            },
            seed: 0,
        }
    }

    /// Attachment parameters for ingested Topology Zoo networks. The router
    /// range is unused there; routers come from the topology file.
    pub fn real_world() -> Self {
        Self {
            router_range: IntRange::new(1, u32::MAX),
            ..Self::baseline()
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        let ranges = [
            ("router_range", self.router_range),
            ("dst_range", self.dst_range),
            ("gateway_count", self.gateway_count),
            ("fwd queries", self.query_counts.fwd),
            ("reach queries", self.query_counts.reach),
            ("iso queries", self.query_counts.iso),
        ];
        for (name, r) in ranges {
            if r.lo < 1 || r.lo > r.hi {
                return Err(GraphError::InfeasibleParams(format!(
                    "{name} [{}, {}] must satisfy 1 <= lo <= hi",
                    r.lo, r.hi
                )));
            }
        }
        if self.gateway_count.hi > self.router_range.lo {
            return Err(GraphError::InfeasibleParams(format!(
                "up to {} gateways requested but networks may have only {} routers",
                self.gateway_count.hi, self.router_range.lo
            )));
        }
        Ok(())
    }
}

/// A validated network graph. Construct through [`build_graph`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetworkGraph {
    roles: Vec<NodeRole>,
    edges: Vec<Edge>,
    dst_attachment: BTreeMap<NodeId, Vec<NodeId>>,
    // derived lookups
    routers: Vec<NodeId>,
    gateways: Vec<NodeId>,
    exas: Vec<NodeId>,
    dsts: Vec<NodeId>,
    ospf_adj: Vec<Vec<NodeId>>,
    exas_gateways: BTreeMap<NodeId, Vec<NodeId>>,
}

impl NetworkGraph {
    pub fn node_count(&self) -> usize {
        self.roles.len()
    }

    pub fn role(&self, id: NodeId) -> NodeRole {
        self.roles[id]
    }

    pub fn roles(&self) -> &[NodeRole] {
        &self.roles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn dst_attachment(&self) -> &BTreeMap<NodeId, Vec<NodeId>> {
        &self.dst_attachment
    }

    pub fn routers(&self) -> &[NodeId] {
        &self.routers
    }

    pub fn gateways(&self) -> &[NodeId] {
        &self.gateways
    }

    pub fn exas(&self) -> &[NodeId] {
        &self.exas
    }

    pub fn dsts(&self) -> &[NodeId] {
        &self.dsts
    }

    /// OSPF neighbours of a router, sorted by id.
    pub fn ospf_neighbors(&self, router: NodeId) -> &[NodeId] {
        &self.ospf_adj[router]
    }

    /// Gateways holding an eBGP session with the given external AS.
    pub fn gateways_of(&self, exas: NodeId) -> &[NodeId] {
        self.exas_gateways.get(&exas).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Position of an external AS among all external ASes (the `m` index).
    pub fn exas_ordinal(&self, exas: NodeId) -> Option<usize> {
        self.exas.binary_search(&exas).ok()
    }

    /// Undirected OSPF links as `(lo, hi)` pairs.
    pub fn ospf_links(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.edges
            .iter()
            .filter(|e| e.kind == EdgeType::Ospf)
            .map(|e| (e.src, e.dst))
    }

    pub fn count_edges(&self, kind: EdgeType) -> usize {
        self.edges.iter().filter(|e| e.kind == kind).count()
    }

    /// Canonical JSON with sorted keys, used for golden files and
    /// determinism checks.
    pub fn to_canonical_json(&self) -> String {
        let nodes: Vec<Value> = self
            .roles
            .iter()
            .enumerate()
            .map(|(id, r)| json!({"id": id, "role": r.name(), "gateway": r.is_gateway()}))
            .collect();
        let edges: Vec<Value> = self
            .edges
            .iter()
            .map(|e| json!({"src": e.src, "dst": e.dst, "type": e.kind.name()}))
            .collect();
        let attach: serde_json::Map<String, Value> = self
            .dst_attachment
            .iter()
            .map(|(k, v)| (k.to_string(), json!(v)))
            .collect();
        // serde_json's default map is a BTreeMap, so keys come out sorted.
        let doc = json!({"nodes": nodes, "edges": edges, "dst_attachment": attach});
        doc.to_string()
    }

    pub fn from_json(text: &str) -> Result<NetworkGraph, GraphError> {
        #[derive(Deserialize)]
        struct NodeJson {
            id: NodeId,
            role: String,
            #[serde(default)]
            gateway: bool,
        }
        #[derive(Deserialize)]
        struct EdgeJson {
            src: NodeId,
            dst: NodeId,
            #[serde(rename = "type")]
            kind: EdgeType,
        }
        #[derive(Deserialize)]
        struct GraphJson {
            nodes: Vec<NodeJson>,
            edges: Vec<EdgeJson>,
            dst_attachment: BTreeMap<String, Vec<NodeId>>,
        }
        let doc: GraphJson = serde_json::from_str(text).map_err(|e| GraphError::Parse(e.to_string()))?;
        let mut nodes = Vec::with_capacity(doc.nodes.len());
        for n in doc.nodes {
            let role = match n.role.as_str() {
                "router" => NodeRole::Router { gateway: n.gateway },
                "dst" => NodeRole::Dst,
                "exas" => NodeRole::Exas,
                other => return Err(GraphError::Parse(format!("unknown role {other:?}"))),
            };
            nodes.push((n.id, role));
        }
        let edges = doc.edges.into_iter().map(|e| Edge::new(e.src, e.dst, e.kind)).collect();
        let mut attach = BTreeMap::new();
        for (k, v) in doc.dst_attachment {
            let k: NodeId = k.parse().map_err(|_| GraphError::Parse(format!("bad dst key {k:?}")))?;
            attach.insert(k, v);
        }
        build_graph(nodes, edges, attach)
    }
}

/// Validate and assemble a raw network graph.
///
/// OSPF edges are stored as `(lo, hi)`; eBGP edges as `(gateway, exas)`.
pub fn build_graph(
    nodes: Vec<(NodeId, NodeRole)>,
    edges: Vec<Edge>,
    dst_attachment: BTreeMap<NodeId, Vec<NodeId>>,
) -> Result<NetworkGraph, GraphError> {
    let n = nodes.len();
    if n == 0 {
        return Err(GraphError::EmptyGraph);
    }
    let mut roles: Vec<Option<NodeRole>> = vec![None; n];
    for (id, role) in nodes {
        match roles.get_mut(id) {
            Some(slot @ None) => *slot = Some(role),
            _ => return Err(GraphError::InvalidNodeIds(n)),
        }
    }
    let roles: Vec<NodeRole> = roles.into_iter().map(|r| r.expect("all slots filled")).collect();

    let mut seen = BTreeSet::new();
    let mut canon = Vec::with_capacity(edges.len());
    for e in edges {
        for id in [e.src, e.dst] {
            if id >= n {
                return Err(GraphError::UnknownNode(id));
            }
        }
        let (rs, rd) = (roles[e.src], roles[e.dst]);
        let oriented = match e.kind {
            EdgeType::Ibgp | EdgeType::SelfLoop => return Err(GraphError::DerivedEdgeType(e.kind)),
            EdgeType::Ospf => {
                if !rs.is_router() || !rd.is_router() || e.src == e.dst {
                    return Err(GraphError::RoleViolation { src: e.src, dst: e.dst, kind: e.kind });
                }
                Edge::new(e.src.min(e.dst), e.src.max(e.dst), e.kind)
            }
            EdgeType::Ebgp => {
                if rs.is_gateway() && rd == NodeRole::Exas {
                    e
                } else if rd.is_gateway() && rs == NodeRole::Exas {
                    Edge::new(e.dst, e.src, e.kind)
                } else {
                    return Err(GraphError::RoleViolation { src: e.src, dst: e.dst, kind: e.kind });
                }
            }
        };
        if !seen.insert(oriented) {
            return Err(GraphError::DuplicateEdge { src: oriented.src, dst: oriented.dst, kind: oriented.kind });
        }
        canon.push(oriented);
    }
    canon.sort_by_key(Edge::sort_key);

    let pick = |f: fn(NodeRole) -> bool| -> Vec<NodeId> { (0..n).filter(|&i| f(roles[i])).collect() };
    let routers = pick(NodeRole::is_router);
    let gateways = pick(NodeRole::is_gateway);
    let exas = pick(|r| r == NodeRole::Exas);
    let dsts = pick(|r| r == NodeRole::Dst);
    if routers.is_empty() {
        return Err(GraphError::NoRouters);
    }
    if gateways.is_empty() {
        return Err(GraphError::NoGateway);
    }

    let mut ospf_adj = vec![Vec::new(); n];
    let mut exas_gateways: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    for e in &canon {
        match e.kind {
            EdgeType::Ospf => {
                ospf_adj[e.src].push(e.dst);
                ospf_adj[e.dst].push(e.src);
            }
            EdgeType::Ebgp => exas_gateways.entry(e.dst).or_default().push(e.src),
            _ => unreachable!("raw graphs hold only OSPF and eBGP edges"),
        }
    }
    for adj in &mut ospf_adj {
        adj.sort_unstable();
    }
    for &x in &exas {
        if !exas_gateways.contains_key(&x) {
            return Err(GraphError::OrphanExas(x));
        }
    }

    let mut attach = BTreeMap::new();
    for (k, mut ms) in dst_attachment {
        if k >= n {
            return Err(GraphError::UnknownNode(k));
        }
        for &m in &ms {
            if m >= n {
                return Err(GraphError::UnknownNode(m));
            }
            if roles[k] != NodeRole::Dst || roles[m] != NodeRole::Exas {
                return Err(GraphError::RoleViolation { src: m, dst: k, kind: EdgeType::Ebgp });
            }
        }
        ms.sort_unstable();
        ms.dedup();
        attach.insert(k, ms);
    }
    for &d in &dsts {
        if attach.get(&d).map_or(true, |ms| ms.is_empty()) {
            return Err(GraphError::DanglingDst(d));
        }
    }

    if !routers_connected(&routers, &ospf_adj) {
        return Err(GraphError::DisconnectedRouters);
    }

    Ok(NetworkGraph {
        roles,
        edges: canon,
        dst_attachment: attach,
        routers,
        gateways,
        exas,
        dsts,
        ospf_adj,
        exas_gateways,
    })
}

fn routers_connected(routers: &[NodeId], adj: &[Vec<NodeId>]) -> bool {
    let Some(&start) = routers.first() else { return false };
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    let mut count = 1;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                queue.push_back(v);
            }
        }
    }
    count == routers.len()
}

/// Router-only topology: `n` routers `0..n` and undirected links `(lo, hi)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RouterCore {
    pub n: usize,
    pub links: Vec<(NodeId, NodeId)>,
}

/// Random connected router topology: a random spanning tree plus random
/// chords until the average degree reaches three.
pub fn random_router_core(n: usize, rng: &mut Rng) -> RouterCore {
    let mut order: Vec<NodeId> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    let mut links = BTreeSet::new();
    for i in 1..n {
        let parent = order[rng.gen_range(0..i)];
        let child = order[i];
        links.insert((parent.min(child), parent.max(child)));
    }
    let max_links = n * n.saturating_sub(1) / 2;
    let target = ((3 * n).div_ceil(2)).max(n.saturating_sub(1)).min(max_links);
    while links.len() < target {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b {
            links.insert((a.min(b), a.max(b)));
        }
    }
    RouterCore { n, links: links.into_iter().collect() }
}

/// Attach gateways, external ASes and destinations to a router core.
///
/// Node ids: routers `0..n_r`, external ASes next (one per gateway, in
/// gateway order), destinations last. Each destination attaches to 1..=3
/// external ASes chosen uniformly.
pub fn attach_external(
    core: &RouterCore,
    n_dst: usize,
    n_gateways: usize,
    rng: &mut Rng,
) -> Result<NetworkGraph, GraphError> {
    let n_r = core.n;
    if n_gateways == 0 || n_gateways > n_r {
        return Err(GraphError::InfeasibleParams(format!(
            "{n_gateways} gateways requested for {n_r} routers"
        )));
    }
    if n_dst == 0 {
        return Err(GraphError::InfeasibleParams("at least one destination is required".into()));
    }
    let mut gateways: Vec<NodeId> = sample(rng, n_r, n_gateways).into_vec();
    gateways.sort_unstable();

    let mut nodes: Vec<(NodeId, NodeRole)> = (0..n_r)
        .map(|i| (i, NodeRole::Router { gateway: gateways.binary_search(&i).is_ok() }))
        .collect();
    let mut edges: Vec<Edge> = core.links.iter().map(|&(a, b)| Edge::new(a, b, EdgeType::Ospf)).collect();
    let exas_base = n_r;
    for (i, &g) in gateways.iter().enumerate() {
        nodes.push((exas_base + i, NodeRole::Exas));
        edges.push(Edge::new(g, exas_base + i, EdgeType::Ebgp));
    }
    let dst_base = exas_base + n_gateways;
    let mut attach = BTreeMap::new();
    for d in 0..n_dst {
        let id = dst_base + d;
        nodes.push((id, NodeRole::Dst));
        let k = rng.gen_range(1..=n_gateways.min(3));
        let mut ms: Vec<NodeId> = sample(rng, n_gateways, k).into_iter().map(|i| exas_base + i).collect();
        ms.sort_unstable();
        attach.insert(id, ms);
    }
    build_graph(nodes, edges, attach)
}

/// Generate a synthetic ISP-style network. Deterministic in `params.seed`.
pub fn generate_synthetic(params: &TopologyParams) -> Result<NetworkGraph, GraphError> {
    params.validate()?;
    let mut rng = seeded(params.seed);
    let n_r = params.router_range.sample(&mut rng) as usize;
    let n_d = params.dst_range.sample(&mut rng) as usize;
    let n_g = params.gateway_count.sample(&mut rng) as usize;
    let core = random_router_core(n_r, &mut rng);
    attach_external(&core, n_d, n_g, &mut rng)
}

/// A graph together with its message-passing edge list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AugmentedGraph {
    pub base: NetworkGraph,
    pub mp_edges: Vec<Edge>,
}

/// Add reversed duplicates of every raw edge, a full iBGP mesh over routers
/// and one self-loop per node. The result is sorted by `(type, src, dst)`.
pub fn augment(graph: &NetworkGraph) -> AugmentedGraph {
    AugmentedGraph { base: graph.clone(), mp_edges: message_passing_edges(graph) }
}

pub fn message_passing_edges(graph: &NetworkGraph) -> Vec<Edge> {
    let n_r = graph.routers.len();
    let mut out = Vec::with_capacity(2 * graph.edges.len() + n_r * n_r + graph.node_count());
    for e in &graph.edges {
        out.push(*e);
        out.push(Edge::new(e.dst, e.src, e.kind));
    }
    for &u in &graph.routers {
        for &v in &graph.routers {
            if u != v {
                out.push(Edge::new(u, v, EdgeType::Ibgp));
            }
        }
    }
    out.extend((0..graph.node_count()).map(|v| Edge::new(v, v, EdgeType::SelfLoop)));
    out.sort_by_key(Edge::sort_key);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> NetworkGraph {
        // routers 0 (gateway), 1; exas 2; dst 3
        build_graph(
            vec![
                (0, NodeRole::Router { gateway: true }),
                (1, NodeRole::Router { gateway: false }),
                (2, NodeRole::Exas),
                (3, NodeRole::Dst),
            ],
            vec![Edge::new(0, 1, EdgeType::Ospf), Edge::new(0, 2, EdgeType::Ebgp)],
            BTreeMap::from([(3, vec![2])]),
        )
        .unwrap()
    }

    #[test]
    fn minimal_instance_is_valid() {
        let g = minimal();
        assert_eq!(g.node_count(), 4);
        assert_eq!(g.routers(), &[0, 1]);
        assert_eq!(g.gateways(), &[0]);
        assert_eq!(g.gateways_of(2), &[0]);
    }

    #[test]
    fn isolated_router_is_rejected() {
        let err = build_graph(
            vec![
                (0, NodeRole::Router { gateway: true }),
                (1, NodeRole::Router { gateway: false }),
                (2, NodeRole::Router { gateway: false }),
                (3, NodeRole::Exas),
                (4, NodeRole::Dst),
            ],
            vec![Edge::new(0, 1, EdgeType::Ospf), Edge::new(0, 3, EdgeType::Ebgp)],
            BTreeMap::from([(4, vec![3])]),
        )
        .unwrap_err();
        assert_eq!(err, GraphError::DisconnectedRouters);
    }

    #[test]
    fn ospf_between_destinations_is_a_role_violation() {
        let err = build_graph(
            vec![
                (0, NodeRole::Router { gateway: true }),
                (1, NodeRole::Exas),
                (2, NodeRole::Dst),
                (3, NodeRole::Dst),
            ],
            vec![Edge::new(0, 1, EdgeType::Ebgp), Edge::new(2, 3, EdgeType::Ospf)],
            BTreeMap::from([(2, vec![1]), (3, vec![1])]),
        )
        .unwrap_err();
        assert!(matches!(err, GraphError::RoleViolation { kind: EdgeType::Ospf, .. }));
    }

    #[test]
    fn other_validation_errors() {
        let dangling = build_graph(
            vec![(0, NodeRole::Router { gateway: true }), (1, NodeRole::Exas), (2, NodeRole::Dst)],
            vec![Edge::new(0, 1, EdgeType::Ebgp)],
            BTreeMap::new(),
        );
        assert_eq!(dangling.unwrap_err(), GraphError::DanglingDst(2));

        let ebgp_to_non_gateway = build_graph(
            vec![(0, NodeRole::Router { gateway: false }), (1, NodeRole::Exas)],
            vec![Edge::new(0, 1, EdgeType::Ebgp)],
            BTreeMap::new(),
        );
        assert!(matches!(ebgp_to_non_gateway.unwrap_err(), GraphError::RoleViolation { .. }));

        let dup = build_graph(
            vec![(0, NodeRole::Router { gateway: true }), (1, NodeRole::Router { gateway: false })],
            vec![Edge::new(0, 1, EdgeType::Ospf), Edge::new(1, 0, EdgeType::Ospf)],
            BTreeMap::new(),
        );
        assert!(matches!(dup.unwrap_err(), GraphError::DuplicateEdge { .. }));

        let ids = build_graph(
            vec![(0, NodeRole::Router { gateway: true }), (2, NodeRole::Exas)],
            vec![],
            BTreeMap::new(),
        );
        assert_eq!(ids.unwrap_err(), GraphError::InvalidNodeIds(2));

        let derived = build_graph(
            vec![(0, NodeRole::Router { gateway: true }), (1, NodeRole::Router { gateway: false })],
            vec![Edge::new(0, 1, EdgeType::Ibgp)],
            BTreeMap::new(),
        );
        assert_eq!(derived.unwrap_err(), GraphError::DerivedEdgeType(EdgeType::Ibgp));

        let no_gw = build_graph(vec![(0, NodeRole::Router { gateway: false })], vec![], BTreeMap::new());
        assert_eq!(no_gw.unwrap_err(), GraphError::NoGateway);

        let orphan = build_graph(
            vec![(0, NodeRole::Router { gateway: true }), (1, NodeRole::Exas)],
            vec![],
            BTreeMap::new(),
        );
        assert_eq!(orphan.unwrap_err(), GraphError::OrphanExas(1));
    }

    #[test]
    fn augment_minimal() {
        let aug = augment(&minimal());
        let count = |k| aug.mp_edges.iter().filter(|e| e.kind == k).count();
        assert_eq!(count(EdgeType::Ospf), 2);
        assert_eq!(count(EdgeType::Ibgp), 2);
        assert_eq!(count(EdgeType::Ebgp), 2);
        assert_eq!(count(EdgeType::SelfLoop), 4);
        let mut sorted = aug.mp_edges.clone();
        sorted.sort_by_key(Edge::sort_key);
        assert_eq!(sorted, aug.mp_edges);
        assert_eq!(augment(&aug.base).mp_edges, aug.mp_edges);
    }

    #[test]
    fn baseline_generation_respects_table_ranges() {
        let g = generate_synthetic(&TopologyParams::baseline().with_seed(7)).unwrap();
        assert!((16..=23).contains(&g.routers().len()));
        assert!((4..=7).contains(&g.dsts().len()));
        assert_eq!(g.exas().len(), 3);
        assert_eq!(g.gateways().len(), 3);
        let again = generate_synthetic(&TopologyParams::baseline().with_seed(7)).unwrap();
        assert_eq!(g.to_canonical_json(), again.to_canonical_json());
    }

    #[test]
    fn larger_scale_generation() {
        for seed in 0..20 {
            let g = generate_synthetic(&TopologyParams::larger_scale().with_seed(seed)).unwrap();
            assert!((24..=31).contains(&g.routers().len()));
            assert!((10..=15).contains(&g.dsts().len()));
            assert!((7..=9).contains(&g.exas().len()));
        }
    }

    #[test]
    fn infeasible_gateway_count() {
        let mut p = TopologyParams::baseline();
        p.gateway_count = IntRange::exactly(40);
        assert!(matches!(generate_synthetic(&p), Err(GraphError::InfeasibleParams(_))));
        p.gateway_count = IntRange::new(0, 2);
        assert!(matches!(generate_synthetic(&p), Err(GraphError::InfeasibleParams(_))));
    }

    #[test]
    fn canonical_json_round_trip() {
        let g = generate_synthetic(&TopologyParams::baseline().with_seed(3)).unwrap();
        let text = g.to_canonical_json();
        assert!(text.starts_with("{\"dst_attachment\":"));
        let back = NetworkGraph::from_json(&text).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn average_degree_is_about_three() {
        let mut rng = seeded(11);
        let core = random_router_core(20, &mut rng);
        assert_eq!(core.links.len(), 30);
    }
}
