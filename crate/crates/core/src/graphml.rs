// SPDX-License-Identifier: Apache-2.0

//! GraphML ingestion for Internet Topology Zoo files.
//!
//! Only connectivity is kept: every GraphML node becomes a router and every
//! edge an OSPF link. Self-loops and parallel edges are dropped, and if the
//! file is disconnected only the largest component survives. Gateways,
//! external ASes and destinations are then synthesised as for synthetic
//! graphs.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use crate::graph::{attach_external, GraphError, NetworkGraph, NodeId, RouterCore, TopologyParams};
use crate::rng::seeded;

/// Parse the router core of a GraphML document.
pub fn parse_router_core(text: &str) -> Result<RouterCore, GraphError> {
    let doc = roxmltree::Document::parse(text).map_err(|e| GraphError::Parse(e.to_string()))?;
    let graph = doc
        .descendants()
        .find(|n| n.tag_name().name() == "graph")
        .ok_or_else(|| GraphError::Parse("no <graph> element".into()))?;

    let mut index: HashMap<&str, usize> = HashMap::new();
    for node in graph.children().filter(|n| n.tag_name().name() == "node") {
        let id = node
            .attribute("id")
            .ok_or_else(|| GraphError::Parse("<node> without id".into()))?;
        let next = index.len();
        if index.insert(id, next).is_some() {
            return Err(GraphError::Parse(format!("duplicate node id {id:?}")));
        }
    }
    if index.is_empty() {
        return Err(GraphError::EmptyGraph);
    }

    let mut links = BTreeSet::new();
    for edge in graph.children().filter(|n| n.tag_name().name() == "edge") {
        let end = |attr: &str| -> Result<usize, GraphError> {
            let id = edge
                .attribute(attr)
                .ok_or_else(|| GraphError::Parse(format!("<edge> without {attr}")))?;
            index
                .get(id)
                .copied()
                .ok_or_else(|| GraphError::Parse(format!("edge endpoint {id:?} is not a node")))
        };
        let (a, b) = (end("source")?, end("target")?);
        if a != b {
            links.insert((a.min(b), a.max(b)));
        }
    }

    Ok(largest_component(index.len(), &links))
}

fn largest_component(n: usize, links: &BTreeSet<(usize, usize)>) -> RouterCore {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in links {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut comp = vec![usize::MAX; n];
    let mut sizes = Vec::new();
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let c = sizes.len();
        let mut stack = vec![start];
        comp[start] = c;
        let mut size = 0;
        while let Some(u) = stack.pop() {
            size += 1;
            for &v in &adj[u] {
                if comp[v] == usize::MAX {
                    comp[v] = c;
                    stack.push(v);
                }
            }
        }
        sizes.push(size);
    }
    // Ties go to the component that appears first in document order.
    let best = (0..sizes.len()).max_by_key(|&c| (sizes[c], std::cmp::Reverse(c))).unwrap_or(0);
    let mut relabel = vec![usize::MAX; n];
    let mut next = 0;
    for v in 0..n {
        if comp[v] == best {
            relabel[v] = next;
            next += 1;
        }
    }
    let links = links
        .iter()
        .filter(|&&(a, _)| comp[a] == best)
        .map(|&(a, b)| (relabel[a], relabel[b]))
        .collect::<Vec<(NodeId, NodeId)>>();
    RouterCore { n: next, links }
}

/// Ingest a GraphML topology and synthesise its external attachments from
/// `attach` (destination count, gateway count and seed).
pub fn load_graphml(text: &str, attach: &TopologyParams) -> Result<NetworkGraph, GraphError> {
    let core = parse_router_core(text)?;
    attach_core(&core, attach)
}

/// Attach gateways, external ASes and destinations to an already parsed core.
pub fn attach_core(core: &RouterCore, attach: &TopologyParams) -> Result<NetworkGraph, GraphError> {
    let mut rng = seeded(attach.seed);
    let n_d = attach.dst_range.sample(&mut rng) as usize;
    let n_g = attach.gateway_count.sample(&mut rng) as usize;
    attach_external(core, n_d, n_g, &mut rng)
}

/// Parse every `*.graphml` file of a directory, sorted by file name. Files
/// whose largest component has fewer than `min_routers` routers are skipped.
pub fn load_zoo_dir(dir: &Path, min_routers: usize) -> Result<Vec<(String, RouterCore)>, GraphError> {
    let entries = std::fs::read_dir(dir).map_err(|e| GraphError::Parse(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("graphml")))
        .collect();
    paths.sort();
    let mut out = Vec::new();
    for path in paths {
        let text = std::fs::read_to_string(&path).map_err(|e| GraphError::Parse(format!("{}: {e}", path.display())))?;
        let core = parse_router_core(&text).map_err(|e| GraphError::Parse(format!("{}: {e}", path.display())))?;
        if core.n >= min_routers {
            let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            out.push((name, core));
        }
    }
    if out.is_empty() {
        return Err(GraphError::EmptyGraph);
    }
    Ok(out)
}
