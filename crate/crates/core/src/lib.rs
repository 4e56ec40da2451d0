// SPDX-License-Identifier: Apache-2.0

//! Misconfiguration laboratory for template-based OSPF/BGP networks.
//!
//! The crate is organised bottom-up:
//!
//! - [`graph`] and [`graphml`]: typed network graphs (routers, destination
//!   networks, external ASes) and their message-passing augmentation.
//! - [`protocol`]: OSPF shortest paths, the BGP decision process and the
//!   resulting forwarding state.
//! - [`specs`]: forwarding/reachability/isolation specifications, their
//!   evaluation and violation diffs.
//! - [`fault`]: template-level fault injection and labelled graph datasets.
//! - [`rb`]: the rule-based symptom matcher.
//! - [`scenario`]: self-contained diagnosis scenarios for the matcher.
//! - [`neuro`]: edge-type-aware graph attention networks with hand-written
//!   reverse-mode gradients, Adam and the training loop.
//! - [`experiments`]: sample-efficiency, zero-shot and runtime-scaling
//!   harnesses shared by the CLI and the acceptance suite.

pub mod error;
pub mod experiments;
pub mod fault;
pub mod graph;
pub mod graphml;
pub mod neuro;
pub mod protocol;
pub mod rb;
pub mod rng;
pub mod scenario;
pub mod specs;

pub use error::Error;
pub use graph::{AugmentedGraph, Edge, EdgeType, NetworkGraph, NodeId, NodeRole, TopologyParams};
