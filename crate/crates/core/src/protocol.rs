// SPDX-License-Identifier: Apache-2.0

//! Fixed-point control-plane model: OSPF shortest paths, the BGP decision
//! process with hot-potato tie-breaking, and the resulting forwarding state.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{NetworkGraph, NodeId};
use crate::specs::{evaluate_all, ObservedSpecs, SpecError, SpecificationSet};

pub const PHI_MAX: u32 = 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("OSPF link {0} -> {1} has no weight")]
    MissingWeight(NodeId, NodeId),
    #[error("OSPF weight {w} on {src} -> {dst} is outside [1, {phi_max}]")]
    WeightOutOfRange { src: NodeId, dst: NodeId, w: u32, phi_max: u32 },
    #[error("no BGP attributes for external AS {0} and destination {1}")]
    MissingAttributes(NodeId, NodeId),
    #[error("BGP attributes given for ({0}, {1}) but that destination is not attached there")]
    UnexpectedAttributes(NodeId, NodeId),
    #[error("exas_index of ({exas}, {dst}) is {found}, expected {expected}")]
    ExasIndexMismatch { exas: NodeId, dst: NodeId, found: u32, expected: u32 },
    #[error("no route candidates")]
    NoRoute,
    #[error("destination {0} is not advertised by any external AS")]
    UnreachableDst(NodeId),
    #[error(transparent)]
    Spec(#[from] SpecError),
}

/// The six BGP route attributes in configuration order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BgpAttr {
    LocalPref,
    Med,
    Origin,
    AsPathLen,
    CiscoWeight,
    ExasIndex,
}

impl BgpAttr {
    pub const ALL: [BgpAttr; 6] = [
        BgpAttr::LocalPref,
        BgpAttr::Med,
        BgpAttr::Origin,
        BgpAttr::AsPathLen,
        BgpAttr::CiscoWeight,
        BgpAttr::ExasIndex,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            BgpAttr::LocalPref => "local_pref",
            BgpAttr::Med => "med",
            BgpAttr::Origin => "origin",
            BgpAttr::AsPathLen => "as_path_len",
            BgpAttr::CiscoWeight => "cisco_weight",
            BgpAttr::ExasIndex => "exas_index",
        }
    }
}

/// Attribute vector of one advertisement, indexed by [`BgpAttr`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BgpAttrs(pub [u32; 6]);

impl BgpAttrs {
    pub fn get(&self, a: BgpAttr) -> u32 {
        self.0[a.index()]
    }

    pub fn set(&mut self, a: BgpAttr, v: u32) {
        self.0[a.index()] = v;
    }
}

/// OSPF link weights and BGP advertisement attributes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "ConfigurationJson", into = "ConfigurationJson")]
pub struct Configuration {
    /// Directed weights, one entry per direction of every OSPF link.
    pub ospf_weights: BTreeMap<(NodeId, NodeId), u32>,
    /// Attributes keyed by `(exas, dst)`.
    pub bgp_attrs: BTreeMap<(NodeId, NodeId), BgpAttrs>,
    pub phi_max: u32,
}

#[derive(Serialize, Deserialize)]
struct ConfigurationJson {
    ospf_weights: Vec<(NodeId, NodeId, u32)>,
    bgp_attrs: Vec<(NodeId, NodeId, [u32; 6])>,
    phi_max: u32,
}

impl From<ConfigurationJson> for Configuration {
    fn from(c: ConfigurationJson) -> Self {
        Self {
            ospf_weights: c.ospf_weights.into_iter().map(|(i, j, w)| ((i, j), w)).collect(),
            bgp_attrs: c.bgp_attrs.into_iter().map(|(m, k, a)| ((m, k), BgpAttrs(a))).collect(),
            phi_max: c.phi_max,
        }
    }
}

impl From<Configuration> for ConfigurationJson {
    fn from(c: Configuration) -> Self {
        Self {
            ospf_weights: c.ospf_weights.into_iter().map(|((i, j), w)| (i, j, w)).collect(),
            bgp_attrs: c.bgp_attrs.into_iter().map(|((m, k), a)| (m, k, a.0)).collect(),
            phi_max: c.phi_max,
        }
    }
}

impl Configuration {
    pub fn weight(&self, src: NodeId, dst: NodeId) -> Option<u32> {
        self.ospf_weights.get(&(src, dst)).copied()
    }

    pub fn attrs(&self, exas: NodeId, dst: NodeId) -> Option<&BgpAttrs> {
        self.bgp_attrs.get(&(exas, dst))
    }

    /// Check the configuration against the graph it is meant for.
    pub fn validate(&self, graph: &NetworkGraph) -> Result<(), ProtocolError> {
        for (a, b) in graph.ospf_links() {
            for (s, d) in [(a, b), (b, a)] {
                let w = self.weight(s, d).ok_or(ProtocolError::MissingWeight(s, d))?;
                if w < 1 || w > self.phi_max {
                    return Err(ProtocolError::WeightOutOfRange { src: s, dst: d, w, phi_max: self.phi_max });
                }
            }
        }
        let mut expected = 0;
        for (&k, ms) in graph.dst_attachment() {
            for &m in ms {
                expected += 1;
                let attrs = self.attrs(m, k).ok_or(ProtocolError::MissingAttributes(m, k))?;
                let ordinal = graph.exas_ordinal(m).unwrap_or(usize::MAX) as u32;
                let found = attrs.get(BgpAttr::ExasIndex);
                if found != ordinal {
                    return Err(ProtocolError::ExasIndexMismatch { exas: m, dst: k, found, expected: ordinal });
                }
            }
        }
        if expected != self.bgp_attrs.len() {
            let (&(m, k), _) = self
                .bgp_attrs
                .iter()
                .find(|((m, k), _)| !graph.dst_attachment().get(k).is_some_and(|ms| ms.contains(m)))
                .expect("an unexpected entry exists");
            return Err(ProtocolError::UnexpectedAttributes(m, k));
        }
        Ok(())
    }
}

/// All-pairs IGP costs and next hops between routers.
///
/// Indexed by node id; entries for non-router pairs are unreachable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IgpCostTable {
    n: usize,
    cost: Vec<u64>,
    next_hop: Vec<Option<NodeId>>,
}

impl IgpCostTable {
    pub fn cost(&self, src: NodeId, dst: NodeId) -> Option<u64> {
        let c = self.cost[src * self.n + dst];
        (c != u64::MAX).then_some(c)
    }

    /// First hop from `src` towards `dst`; `None` when `src == dst`.
    pub fn next_hop(&self, src: NodeId, dst: NodeId) -> Option<NodeId> {
        self.next_hop[src * self.n + dst]
    }

    /// Router sequence from `src` to `dst`, both included.
    pub fn path(&self, src: NodeId, dst: NodeId) -> Vec<NodeId> {
        let mut path = vec![src];
        let mut cur = src;
        while cur != dst {
            match self.next_hop(cur, dst) {
                Some(nh) => {
                    path.push(nh);
                    cur = nh;
                }
                None => break,
            }
        }
        path
    }
}

/// Shortest paths over directed OSPF weights from every router.
///
/// Among equal-cost alternatives the next hop with the smallest id wins.
/// Hop-by-hop forwarding along these next hops strictly decreases the
/// remaining cost, so every path is a shortest, loop-free path.
pub fn ospf_shortest_paths(graph: &NetworkGraph, config: &Configuration) -> Result<IgpCostTable, ProtocolError> {
    let n = graph.node_count();
    let mut weights: Vec<Vec<(NodeId, u64)>> = vec![Vec::new(); n];
    for &r in graph.routers() {
        for &nb in graph.ospf_neighbors(r) {
            let w = config.weight(r, nb).ok_or(ProtocolError::MissingWeight(r, nb))?;
            weights[r].push((nb, w as u64));
        }
    }

    let mut cost = vec![u64::MAX; n * n];
    for &src in graph.routers() {
        // Distances are computed *to* src over reversed arcs so that
        // `cost[u][src]` is the cost of u's forward path.
        let row = &mut cost[src * n..(src + 1) * n];
        row[src] = 0;
        let mut heap = BinaryHeap::from([Reverse((0u64, src))]);
        while let Some(Reverse((d, u))) = heap.pop() {
            if d > row[u] {
                continue;
            }
            for &(v, w) in &weights[u] {
                let nd = d + w;
                if nd < row[v] {
                    row[v] = nd;
                    heap.push(Reverse((nd, v)));
                }
            }
        }
    }

    let mut next_hop = vec![None; n * n];
    for &i in graph.routers() {
        for &j in graph.routers() {
            if i == j {
                continue;
            }
            let d = cost[i * n + j];
            if d == u64::MAX {
                continue;
            }
            next_hop[i * n + j] = weights[i]
                .iter()
                .filter(|&&(y, w)| cost[y * n + j] != u64::MAX && w + cost[y * n + j] == d)
                .map(|&(y, _)| y)
                .min();
        }
    }

    Ok(IgpCostTable { n, cost, next_hop })
}

/// A BGP route offered by an external AS through one gateway.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub exas: NodeId,
    pub gateway: NodeId,
    pub attrs: BgpAttrs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Route {
    pub exas: NodeId,
    pub gateway: NodeId,
}

/// Preference key; smaller is better.
///
/// | step | criterion          | preferred |
/// |------|--------------------|-----------|
/// | 1    | cisco_weight       | higher    |
/// | 2    | local_pref         | higher    |
/// | 3    | as_path_len        | shorter   |
/// | 4    | origin             | lower     |
/// | 5    | med                | lower     |
/// | 6    | IGP cost to egress | lower     |
/// | 7    | exas_index         | lower     |
/// | 8    | gateway id         | lower     |
pub type DecisionKey = (Reverse<u32>, Reverse<u32>, u32, u32, u32, u64, u32, NodeId);

pub fn decision_key(c: &Candidate, igp_cost: u64) -> DecisionKey {
    let a = &c.attrs;
    (
        Reverse(a.get(BgpAttr::CiscoWeight)),
        Reverse(a.get(BgpAttr::LocalPref)),
        a.get(BgpAttr::AsPathLen),
        a.get(BgpAttr::Origin),
        a.get(BgpAttr::Med),
        igp_cost,
        a.get(BgpAttr::ExasIndex),
        c.gateway,
    )
}

/// Run the decision process for a router.
pub fn bgp_select(candidates: &[Candidate], from: NodeId, igp: &IgpCostTable) -> Result<Route, ProtocolError> {
    candidates
        .iter()
        .map(|c| (decision_key(c, igp.cost(from, c.gateway).unwrap_or(u64::MAX)), c))
        .min_by(|a, b| a.0.cmp(&b.0).then(Ordering::Equal))
        .map(|(_, c)| Route { exas: c.exas, gateway: c.gateway })
        .ok_or(ProtocolError::NoRoute)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForwardingEntry {
    pub egress: Route,
    /// Next router on the path, or the external AS at the egress gateway.
    pub next_hop: NodeId,
    /// Routers from the source to the egress gateway, both included.
    pub path: Vec<NodeId>,
}

/// Per `(router, dst)` forwarding decisions.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ForwardingState {
    entries: BTreeMap<(NodeId, NodeId), ForwardingEntry>,
}

impl ForwardingState {
    pub fn entry(&self, router: NodeId, dst: NodeId) -> Option<&ForwardingEntry> {
        self.entries.get(&(router, dst))
    }

    pub fn egress(&self, router: NodeId, dst: NodeId) -> Option<Route> {
        self.entry(router, dst).map(|e| e.egress)
    }

    pub fn next_hop(&self, router: NodeId, dst: NodeId) -> Option<NodeId> {
        self.entry(router, dst).map(|e| e.next_hop)
    }

    pub fn path(&self, router: NodeId, dst: NodeId) -> Option<&[NodeId]> {
        self.entry(router, dst).map(|e| e.path.as_slice())
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(NodeId, NodeId), &ForwardingEntry)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Route candidates for a destination: every attached external AS through
/// every gateway it peers with.
pub fn candidates_for(graph: &NetworkGraph, config: &Configuration, dst: NodeId) -> Result<Vec<Candidate>, ProtocolError> {
    let mut out = Vec::new();
    for &m in graph.dst_attachment().get(&dst).map(Vec::as_slice).unwrap_or(&[]) {
        let attrs = *config.attrs(m, dst).ok_or(ProtocolError::MissingAttributes(m, dst))?;
        for &g in graph.gateways_of(m) {
            out.push(Candidate { exas: m, gateway: g, attrs });
        }
    }
    Ok(out)
}

/// Compute the converged forwarding state of every router for every
/// destination. Traffic follows the OSPF path to the egress gateway chosen
/// by the source router.
pub fn compute_forwarding(graph: &NetworkGraph, config: &Configuration) -> Result<ForwardingState, ProtocolError> {
    let igp = ospf_shortest_paths(graph, config)?;
    compute_forwarding_with(graph, config, &igp)
}

pub fn compute_forwarding_with(
    graph: &NetworkGraph,
    config: &Configuration,
    igp: &IgpCostTable,
) -> Result<ForwardingState, ProtocolError> {
    let mut entries = BTreeMap::new();
    for &k in graph.dsts() {
        let cands = candidates_for(graph, config, k)?;
        if cands.is_empty() {
            return Err(ProtocolError::UnreachableDst(k));
        }
        for &i in graph.routers() {
            let egress = bgp_select(&cands, i, igp)?;
            let path = igp.path(i, egress.gateway);
            let next_hop = if path.len() > 1 { path[1] } else { egress.exas };
            entries.insert((i, k), ForwardingEntry { egress, next_hop, path });
        }
    }
    Ok(ForwardingState { entries })
}

/// Execute the configuration and evaluate every query against the result.
pub fn prot(graph: &NetworkGraph, config: &Configuration, queries: &SpecificationSet) -> Result<ObservedSpecs, ProtocolError> {
    if queries.is_empty() {
        return Ok(ObservedSpecs { values: Vec::new() });
    }
    let fwd = compute_forwarding(graph, config)?;
    Ok(evaluate_all(queries, &fwd)?)
}
