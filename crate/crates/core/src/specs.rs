// SPDX-License-Identifier: Apache-2.0

//! Forwarding, reachability and isolation specifications: generation from a
//! known-good configuration, evaluation against forwarding state, and the
//! violation diff used by the rule-based diagnoser.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{NetworkGraph, NodeId, NodeRole};
use crate::protocol::{compute_forwarding, Configuration, ForwardingState, ProtocolError};
use crate::rng::seeded;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpecError {
    #[error("forwarding state has no entry for router {0} and destination {1}")]
    UnknownPair(NodeId, NodeId),
    #[error("specification and observation lengths differ ({specs} vs {observed})")]
    LengthMismatch { specs: usize, observed: usize },
    #[error("duplicate {0:?} specification {1:?}")]
    Duplicate(SpecKind, Query),
    #[error("specification {0:?} does not fit the graph: {1}")]
    InvalidQuery(Query, &'static str),
    #[error("only {available:?} of the requested {requested:?} (fwd, reach, iso) queries exist")]
    InsufficientCandidates { requested: [usize; 3], available: [usize; 3] },
    #[error("spec-set parse error: {0}")]
    Parse(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpecKind {
    Fwd,
    Reach,
    Iso,
}

impl SpecKind {
    pub const ALL: [SpecKind; 3] = [SpecKind::Fwd, SpecKind::Reach, SpecKind::Iso];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            SpecKind::Fwd => "fwd",
            SpecKind::Reach => "reach",
            SpecKind::Iso => "iso",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Query {
    /// Router `router` forwards traffic for `dst` to `via`.
    Fwd { router: NodeId, dst: NodeId, via: NodeId },
    /// Traffic from `router` to `dst` traverses `waypoint`.
    Reach { router: NodeId, dst: NodeId, waypoint: NodeId },
    /// The OSPF link `(a, b)` does not carry traffic for both `dst1` and `dst2`.
    Iso { a: NodeId, b: NodeId, dst1: NodeId, dst2: NodeId },
}

impl Query {
    pub fn kind(&self) -> SpecKind {
        match self {
            Query::Fwd { .. } => SpecKind::Fwd,
            Query::Reach { .. } => SpecKind::Reach,
            Query::Iso { .. } => SpecKind::Iso,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Specification {
    pub query: Query,
    pub expected: bool,
}

impl Specification {
    pub fn holds(query: Query) -> Self {
        Self { query, expected: true }
    }

    pub fn kind(&self) -> SpecKind {
        self.query.kind()
    }
}

/// Ordered specification list.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SpecificationSet {
    specs: Vec<Specification>,
}

impl SpecificationSet {
    pub fn new(specs: Vec<Specification>) -> Result<Self, SpecError> {
        let mut seen = HashSet::new();
        for s in &specs {
            if !seen.insert(s.query) {
                return Err(SpecError::Duplicate(s.kind(), s.query));
            }
        }
        Ok(Self { specs })
    }

    pub fn specs(&self) -> &[Specification] {
        &self.specs
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    /// `(n_fwd, n_reach, n_iso)`.
    pub fn counts(&self) -> [usize; 3] {
        let mut c = [0; 3];
        for s in &self.specs {
            c[s.kind().index()] += 1;
        }
        c
    }

    /// Check ids and roles against a graph.
    pub fn validate(&self, graph: &NetworkGraph) -> Result<(), SpecError> {
        let n = graph.node_count();
        let is_router = |v: NodeId| v < n && graph.role(v).is_router();
        let is_dst = |v: NodeId| v < n && graph.role(v) == NodeRole::Dst;
        for s in &self.specs {
            let q = s.query;
            match q {
                Query::Fwd { router, dst, via } => {
                    if !is_router(router) || !is_dst(dst) {
                        return Err(SpecError::InvalidQuery(q, "fwd needs a router and a destination"));
                    }
                    if via >= n || graph.role(via) == NodeRole::Dst {
                        return Err(SpecError::InvalidQuery(q, "fwd next hop must be a router or external AS"));
                    }
                }
                Query::Reach { router, dst, waypoint } => {
                    if !is_router(router) || !is_dst(dst) || !is_router(waypoint) {
                        return Err(SpecError::InvalidQuery(q, "reach needs routers and a destination"));
                    }
                }
                Query::Iso { a, b, dst1, dst2 } => {
                    if !is_router(a) || !is_router(b) || !graph.ospf_neighbors(a).contains(&b) {
                        return Err(SpecError::InvalidQuery(q, "iso link must be an OSPF link"));
                    }
                    if !is_dst(dst1) || !is_dst(dst2) || dst1 == dst2 {
                        return Err(SpecError::InvalidQuery(q, "iso needs two distinct destinations"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&SpecSetJson::from(self)).expect("spec sets always serialise")
    }

    pub fn from_json(text: &str) -> Result<Self, SpecError> {
        let doc: SpecSetJson = serde_json::from_str(text).map_err(|e| SpecError::Parse(e.to_string()))?;
        doc.try_into()
    }
}

/// Wire format. Entries are grouped by kind; `expected_false` lists the
/// positions (in fwd, reach, iso order) of specs expected not to hold and is
/// omitted when empty.
#[derive(Serialize, Deserialize)]
struct SpecSetJson {
    fwd: Vec<[NodeId; 3]>,
    reach: Vec<[NodeId; 3]>,
    iso: Vec<[NodeId; 4]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    expected_false: Vec<usize>,
}

impl From<&SpecificationSet> for SpecSetJson {
    fn from(set: &SpecificationSet) -> Self {
        let mut out = SpecSetJson { fwd: vec![], reach: vec![], iso: vec![], expected_false: vec![] };
        let mut ordered: Vec<&Specification> = set.specs.iter().collect();
        ordered.sort_by_key(|s| s.kind());
        for (pos, s) in ordered.into_iter().enumerate() {
            match s.query {
                Query::Fwd { router, dst, via } => out.fwd.push([router, dst, via]),
                Query::Reach { router, dst, waypoint } => out.reach.push([router, dst, waypoint]),
                Query::Iso { a, b, dst1, dst2 } => out.iso.push([a, b, dst1, dst2]),
            }
            if !s.expected {
                out.expected_false.push(pos);
            }
        }
        out
    }
}

impl TryFrom<SpecSetJson> for SpecificationSet {
    type Error = SpecError;

    fn try_from(doc: SpecSetJson) -> Result<Self, SpecError> {
        let mut specs: Vec<Specification> = doc
            .fwd
            .into_iter()
            .map(|[router, dst, via]| Query::Fwd { router, dst, via })
            .chain(doc.reach.into_iter().map(|[router, dst, waypoint]| Query::Reach { router, dst, waypoint }))
            .chain(doc.iso.into_iter().map(|[a, b, dst1, dst2]| Query::Iso { a, b, dst1, dst2 }))
            .map(Specification::holds)
            .collect();
        for i in doc.expected_false {
            let len = specs.len();
            specs
                .get_mut(i)
                .ok_or_else(|| SpecError::Parse(format!("expected_false index {i} out of range {len}")))?
                .expected = false;
        }
        SpecificationSet::new(specs)
    }
}

/// Observed truth values, aligned with a [`SpecificationSet`].
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ObservedSpecs {
    pub values: Vec<bool>,
}

/// Violated spec indices, overall and per kind.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct DeltaS {
    pub violated: Vec<usize>,
    pub by_kind: [Vec<usize>; 3],
}

impl DeltaS {
    pub fn len(&self) -> usize {
        self.violated.len()
    }

    pub fn is_empty(&self) -> bool {
        self.violated.is_empty()
    }

    pub fn kind_counts(&self) -> [usize; 3] {
        [self.by_kind[0].len(), self.by_kind[1].len(), self.by_kind[2].len()]
    }

    /// A delta with the given number of violations per kind, indices assigned
    /// in fwd, reach, iso order.
    pub fn from_counts(counts: [usize; 3]) -> Self {
        let mut d = DeltaS::default();
        let mut idx = 0;
        for (k, &c) in counts.iter().enumerate() {
            for _ in 0..c {
                d.violated.push(idx);
                d.by_kind[k].push(idx);
                idx += 1;
            }
        }
        d
    }
}

/// Undirected links used by some router's path towards each destination.
#[derive(Clone, Debug, Default)]
pub struct LinkUsage {
    by_dst: BTreeMap<NodeId, HashSet<(NodeId, NodeId)>>,
}

impl LinkUsage {
    pub fn from_forwarding(fwd: &ForwardingState) -> Self {
        let mut by_dst: BTreeMap<NodeId, HashSet<(NodeId, NodeId)>> = BTreeMap::new();
        for (&(_, k), e) in fwd.entries() {
            let used = by_dst.entry(k).or_default();
            for w in e.path.windows(2) {
                used.insert((w[0].min(w[1]), w[0].max(w[1])));
            }
        }
        Self { by_dst }
    }

    pub fn carries(&self, a: NodeId, b: NodeId, dst: NodeId) -> bool {
        self.by_dst.get(&dst).is_some_and(|s| s.contains(&(a.min(b), a.max(b))))
    }
}

/// Evaluate one specification. Iso queries scan every source path; use
/// [`evaluate_all`] for sets.
pub fn eval_spec(spec: &Specification, fwd: &ForwardingState) -> Result<bool, SpecError> {
    eval_with(spec, fwd, None)
}

fn eval_with(spec: &Specification, fwd: &ForwardingState, usage: Option<&LinkUsage>) -> Result<bool, SpecError> {
    let entry = |i, k| fwd.entry(i, k).ok_or(SpecError::UnknownPair(i, k));
    Ok(match spec.query {
        Query::Fwd { router, dst, via } => entry(router, dst)?.next_hop == via,
        Query::Reach { router, dst, waypoint } => entry(router, dst)?.path.contains(&waypoint),
        Query::Iso { a, b, dst1, dst2 } => {
            let carries = |k: NodeId| -> Result<bool, SpecError> {
                if let Some(u) = usage {
                    return Ok(u.carries(a, b, k));
                }
                let mut any_entry = false;
                for (&(_, kk), e) in fwd.entries() {
                    if kk != k {
                        continue;
                    }
                    any_entry = true;
                    if e.path.windows(2).any(|w| (w[0] == a && w[1] == b) || (w[0] == b && w[1] == a)) {
                        return Ok(true);
                    }
                }
                if any_entry {
                    Ok(false)
                } else {
                    Err(SpecError::UnknownPair(a, k))
                }
            };
            !(carries(dst1)? && carries(dst2)?)
        }
    })
}

/// Evaluate every spec of a set against forwarding state.
pub fn evaluate_all(set: &SpecificationSet, fwd: &ForwardingState) -> Result<ObservedSpecs, SpecError> {
    let usage = LinkUsage::from_forwarding(fwd);
    let mut values = Vec::with_capacity(set.len());
    for s in set.specs() {
        if let Query::Iso { a, dst1, dst2, .. } = s.query {
            for k in [dst1, dst2] {
                if fwd.entry(a, k).is_none() {
                    return Err(SpecError::UnknownPair(a, k));
                }
            }
        }
        values.push(eval_with(s, fwd, Some(&usage))?);
    }
    Ok(ObservedSpecs { values })
}

fn check_len(set: &SpecificationSet, observed: &ObservedSpecs) -> Result<(), SpecError> {
    if set.len() != observed.values.len() {
        return Err(SpecError::LengthMismatch { specs: set.len(), observed: observed.values.len() });
    }
    Ok(())
}

/// True iff any observed value differs from its expectation.
pub fn f_check(set: &SpecificationSet, observed: &ObservedSpecs) -> Result<bool, SpecError> {
    check_len(set, observed)?;
    Ok(set.specs().iter().zip(&observed.values).any(|(s, &v)| s.expected != v))
}

pub fn diff_specs(set: &SpecificationSet, observed: &ObservedSpecs) -> Result<DeltaS, SpecError> {
    check_len(set, observed)?;
    let mut d = DeltaS::default();
    for (i, (s, &v)) in set.specs().iter().zip(&observed.values).enumerate() {
        if s.expected != v {
            d.violated.push(i);
            d.by_kind[s.kind().index()].push(i);
        }
    }
    Ok(d)
}

/// Requested versus available query counts when a graph cannot supply all
/// requested queries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Shortfall {
    pub requested: [usize; 3],
    pub available: [usize; 3],
}

/// Sample queries that hold under `true_config`; fails when the graph cannot
/// supply the requested counts.
pub fn generate_queries(
    graph: &NetworkGraph,
    true_config: &Configuration,
    counts: [usize; 3],
    seed: u64,
) -> Result<SpecificationSet, ProtocolError> {
    let (set, shortfall) = generate_queries_clamped(graph, true_config, counts, seed)?;
    match shortfall {
        Some(s) => Err(SpecError::InsufficientCandidates { requested: s.requested, available: s.available }.into()),
        None => Ok(set),
    }
}

/// Like [`generate_queries`] but clamps each count to the number of
/// candidates and reports the shortfall instead of failing.
///
/// Fwd queries name the router next hop of a `(router, dst)` pair, reach
/// queries a later router on its path. Iso queries are drawn from links that
/// carry traffic for at least one of the two destinations but not both; fully
/// idle links are used only when those run out.
pub fn generate_queries_clamped(
    graph: &NetworkGraph,
    true_config: &Configuration,
    counts: [usize; 3],
    seed: u64,
) -> Result<(SpecificationSet, Option<Shortfall>), ProtocolError> {
    let fwd = compute_forwarding(graph, true_config)?;
    let usage = LinkUsage::from_forwarding(&fwd);
    let mut rng = seeded(seed);

    let mut fwd_c = Vec::new();
    let mut reach_c = Vec::new();
    for (&(i, k), e) in fwd.entries() {
        if e.path.len() > 1 {
            fwd_c.push(Query::Fwd { router: i, dst: k, via: e.path[1] });
        }
        for &w in &e.path[1..] {
            reach_c.push(Query::Reach { router: i, dst: k, waypoint: w });
        }
    }

    let mut iso_active = Vec::new();
    let mut iso_idle = Vec::new();
    let dsts = graph.dsts();
    for (a, b) in graph.ospf_links() {
        for (x, &k) in dsts.iter().enumerate() {
            for &m in &dsts[x + 1..] {
                let (ck, cm) = (usage.carries(a, b, k), usage.carries(a, b, m));
                let q = Query::Iso { a, b, dst1: k, dst2: m };
                match (ck, cm) {
                    (true, true) => {}
                    (false, false) => iso_idle.push(q),
                    _ => iso_active.push(q),
                }
            }
        }
    }

    let available = [fwd_c.len(), reach_c.len(), iso_active.len() + iso_idle.len()];
    let mut take = |mut pool: Vec<Query>, n: usize| -> Vec<Query> {
        pool.shuffle(&mut rng);
        pool.truncate(n);
        pool.sort();
        pool
    };
    let mut picked = take(fwd_c, counts[0]);
    picked.extend(take(reach_c, counts[1]));
    let n_active = counts[2].min(iso_active.len());
    picked.extend(take(iso_active, n_active));
    picked.extend(take(iso_idle, counts[2] - n_active));

    let set = SpecificationSet::new(picked.into_iter().map(Specification::holds).collect())?;
    let got = set.counts();
    let shortfall = (got != counts).then_some(Shortfall { requested: counts, available });
    Ok((set, shortfall))
}

/// Distinct `(router, dst)` pairs referenced by a set; handy for checks.
pub fn referenced_pairs(set: &SpecificationSet) -> BTreeSet<(NodeId, NodeId)> {
    set.specs()
        .iter()
        .filter_map(|s| match s.query {
            Query::Fwd { router, dst, .. } | Query::Reach { router, dst, .. } => Some((router, dst)),
            Query::Iso { .. } => None,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_synthetic, TopologyParams};
    use crate::fault::sample_true_config;

    fn scenario(seed: u64) -> (NetworkGraph, Configuration) {
        let g = generate_synthetic(&TopologyParams::baseline().with_seed(seed)).unwrap();
        let c = sample_true_config(&g, seed);
        (g, c)
    }

    #[test]
    fn generated_queries_hold_under_true_config() {
        for seed in 0..20 {
            let (g, c) = scenario(seed);
            let set = generate_queries(&g, &c, [10, 5, 20], seed).unwrap();
            assert_eq!(set.counts(), [10, 5, 20]);
            set.validate(&g).unwrap();
            let fwd = compute_forwarding(&g, &c).unwrap();
            let obs = evaluate_all(&set, &fwd).unwrap();
            assert!(!f_check(&set, &obs).unwrap());
            for (s, &v) in set.specs().iter().zip(&obs.values) {
                assert_eq!(eval_spec(s, &fwd).unwrap(), v);
            }
        }
    }

    #[test]
    fn seeds_change_the_sample_but_not_counts() {
        let (g, c) = scenario(3);
        let a = generate_queries(&g, &c, [8, 4, 10], 1).unwrap();
        let b = generate_queries(&g, &c, [8, 4, 10], 2).unwrap();
        assert_ne!(a, b);
        assert_eq!(a.counts(), b.counts());
        assert_eq!(a, generate_queries(&g, &c, [8, 4, 10], 1).unwrap());
    }

    #[test]
    fn shortfall_is_reported() {
        let (g, c) = scenario(4);
        let (set, short) = generate_queries_clamped(&g, &c, [100_000, 1, 1], 0).unwrap();
        let short = short.unwrap();
        assert_eq!(set.counts()[0], short.available[0]);
        assert!(matches!(
            generate_queries(&g, &c, [100_000, 1, 1], 0),
            Err(ProtocolError::Spec(SpecError::InsufficientCandidates { .. }))
        ));
    }

    #[test]
    fn reach_of_self_and_egress_hold() {
        let (g, c) = scenario(5);
        let fwd = compute_forwarding(&g, &c).unwrap();
        for (&(i, k), e) in fwd.entries() {
            let own = Specification::holds(Query::Reach { router: i, dst: k, waypoint: i });
            assert!(eval_spec(&own, &fwd).unwrap());
            let egress = Specification::holds(Query::Reach { router: i, dst: k, waypoint: e.egress.gateway });
            assert!(eval_spec(&egress, &fwd).unwrap());
        }
    }

    #[test]
    fn unknown_pair_is_an_error() {
        let (_, _) = scenario(6);
        let fwd = ForwardingState::default();
        let s = Specification::holds(Query::Fwd { router: 0, dst: 99, via: 1 });
        assert_eq!(eval_spec(&s, &fwd).unwrap_err(), SpecError::UnknownPair(0, 99));
    }

    #[test]
    fn f_check_and_diff() {
        let set = SpecificationSet::new(vec![
            Specification::holds(Query::Fwd { router: 0, dst: 5, via: 1 }),
            Specification::holds(Query::Fwd { router: 1, dst: 5, via: 2 }),
            Specification::holds(Query::Reach { router: 0, dst: 5, waypoint: 2 }),
            Specification::holds(Query::Iso { a: 0, b: 1, dst1: 5, dst2: 6 }),
        ])
        .unwrap();
        let ok = ObservedSpecs { values: vec![true; 4] };
        assert!(!f_check(&set, &ok).unwrap());
        assert!(diff_specs(&set, &ok).unwrap().is_empty());
        let one = ObservedSpecs { values: vec![true, true, false, true] };
        assert!(f_check(&set, &one).unwrap());
        let flips = ObservedSpecs { values: vec![false, false, true, false] };
        let d = diff_specs(&set, &flips).unwrap();
        assert_eq!(d.kind_counts(), [2, 0, 1]);
        assert_eq!(d.violated, vec![0, 1, 3]);
        let short = ObservedSpecs { values: vec![true] };
        assert!(matches!(f_check(&set, &short), Err(SpecError::LengthMismatch { .. })));
        assert!(matches!(diff_specs(&set, &short), Err(SpecError::LengthMismatch { .. })));
    }

    #[test]
    fn duplicates_are_rejected() {
        let q = Query::Fwd { router: 0, dst: 5, via: 1 };
        assert!(matches!(
            SpecificationSet::new(vec![Specification::holds(q), Specification::holds(q)]),
            Err(SpecError::Duplicate(SpecKind::Fwd, _))
        ));
    }

    #[test]
    fn json_round_trip() {
        let (g, c) = scenario(8);
        let set = generate_queries(&g, &c, [8, 4, 10], 3).unwrap();
        let text = set.to_json();
        assert!(text.starts_with("{\"fwd\":[["));
        assert!(!text.contains("expected_false"));
        assert_eq!(SpecificationSet::from_json(&text).unwrap(), set);

        let mut specs = set.specs().to_vec();
        specs[2].expected = false;
        let neg = SpecificationSet::new(specs).unwrap();
        assert_eq!(SpecificationSet::from_json(&neg.to_json()).unwrap(), neg);
    }
}
