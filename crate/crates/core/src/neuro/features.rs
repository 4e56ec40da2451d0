// SPDX-License-Identifier: Apache-2.0

//! Conversion of labelled samples into network inputs.
//!
//! Template columns are standardised with fixed constants taken from the
//! attribute sampling ranges, so an offset of the same size looks the same in
//! every graph regardless of its size or random draw. The external-AS index
//! column is centred per graph on the mean index `(M - 1) / 2` of its `M`
//! external ASes and left unscaled.

use crate::fault::{GraphSample, BGP_RANGES, N_FEATURES};
use crate::graph::EdgeType;
use crate::protocol::PHI_MAX;

use super::layer::GraphStructure;
use super::NeuroError;

/// A graph ready for the network: node features, incoming-edge lists and an
/// optional class label.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphInput {
    pub x: Vec<f64>,
    pub d_feat: usize,
    pub structure: GraphStructure,
    pub label: Option<usize>,
}

impl GraphInput {
    pub fn n(&self) -> usize {
        self.structure.n
    }
}

fn uniform_std(lo: u32, hi: u32) -> f64 {
    let span = (hi - lo + 1) as f64;
    ((span * span - 1.0) / 12.0).sqrt()
}

/// `(centre, scale)` for columns 3..=8; column 9 is handled per graph.
pub fn column_standardisation() -> [(f64, f64); 6] {
    let mut out = [(0.0, 1.0); 6];
    out[0] = ((1 + PHI_MAX) as f64 / 2.0, uniform_std(1, PHI_MAX));
    for (slot, &(lo, hi)) in out[1..].iter_mut().zip(&BGP_RANGES) {
        *slot = ((lo + hi) as f64 / 2.0, uniform_std(lo, hi));
    }
    out
}

/// Normalise a feature matrix in place. `n_exas` is the number of external
/// ASes in the graph.
pub fn normalise_features(x: &mut [f64], n_exas: usize) {
    let std = column_standardisation();
    let exas_centre = n_exas.saturating_sub(1) as f64 / 2.0;
    for row in x.chunks_mut(N_FEATURES) {
        for (c, &(centre, scale)) in std.iter().enumerate() {
            row[3 + c] = (row[3 + c] - centre) / scale;
        }
        row[9] -= exas_centre;
    }
}

/// Prepare a dataset sample for the network.
pub fn prepare(sample: &GraphSample) -> Result<GraphInput, NeuroError> {
    let mut x = sample.features.clone();
    let n_exas = (0..sample.n_nodes).filter(|&v| sample.row(v)[2] == 1.0).count();
    normalise_features(&mut x, n_exas);
    let structure = GraphStructure::from_edges(
        sample.n_nodes,
        sample.edges.iter().map(|e| (e.src, e.dst, e.kind.index())),
    )?;
    Ok(GraphInput { x, d_feat: N_FEATURES, structure, label: sample.label.label() })
}

/// Number of edge types in prepared network graphs.
pub const N_EDGE_TYPES: usize = EdgeType::COUNT;
