// SPDX-License-Identifier: Apache-2.0

//! Self-contained diagnosis scenarios: a network, its intended
//! configuration, the specifications written against it and an optional
//! injected template fault.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::fault::{inject_config_fault, inject_config_fault_with, sample_true_config, FaultClass, FaultError, TopologySource};
use crate::graph::NetworkGraph;
use crate::protocol::{prot, Configuration};
use crate::rb::{rb_classify, RbVerdict, WeightTable};
use crate::rng::derive_seed;
use crate::specs::{diff_specs, f_check, generate_queries_clamped, SpecificationSet};
use crate::Error;

pub const SCENARIO_FORMAT: &str = "misconf-scenario";
pub const SCENARIO_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub graph: NetworkGraph,
    /// Configuration the specifications were written against.
    pub config: Configuration,
    pub queries: SpecificationSet,
    /// `F0` means nothing was injected.
    pub fault: FaultClass,
    pub delta: Option<u32>,
}

#[derive(Serialize, Deserialize)]
struct ScenarioJson {
    format: String,
    version: u32,
    fault: FaultClass,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delta: Option<u32>,
    graph: Value,
    config: Configuration,
    queries: Value,
}

/// Outcome of running the specification check and the rule-based matcher.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnosis {
    pub alarm: bool,
    pub n_specs: usize,
    /// Violated specifications by kind: fwd, reach, iso.
    pub violations: [usize; 3],
    /// Absent when no specification is violated.
    pub verdict: Option<RbVerdict>,
}

impl Scenario {
    /// Draw a topology, its intended configuration and `counts` queries,
    /// then inject `fault` with offset `delta` (drawn from the seed when
    /// `None`).
    pub fn generate(source: &TopologySource, seed: u64, fault: FaultClass, delta: Option<u32>) -> Result<Self, Error> {
        source.validate()?;
        let (graph, _) = source.topology(derive_seed(seed, 0))?;
        let config = sample_true_config(&graph, derive_seed(seed, 1));
        let qc = source.params().query_counts;
        let mut qrng = crate::rng::seeded(derive_seed(seed, 2));
        let counts = [qc.fwd.sample(&mut qrng) as usize, qc.reach.sample(&mut qrng) as usize, qc.iso.sample(&mut qrng) as usize];
        let (queries, _) = generate_queries_clamped(&graph, &config, counts, derive_seed(seed, 4))?;
        let delta = match (fault, delta) {
            (FaultClass::F0, _) => None,
            (_, Some(d)) => Some(d),
            (f, None) => Some(inject_config_fault(&config, f, derive_seed(seed, 3))?.1),
        };
        Ok(Self { graph, config, queries, fault, delta })
    }

    /// The configuration actually deployed.
    pub fn deployed(&self) -> Result<Configuration, FaultError> {
        match (self.fault, self.delta) {
            (FaultClass::F0, _) => Ok(self.config.clone()),
            (f, Some(d)) => inject_config_fault_with(&self.config, f, d),
            (_, None) => Err(FaultError::Format("an injected fault needs an offset".into())),
        }
    }

    pub fn diagnose(&self, table: &WeightTable) -> Result<Diagnosis, Error> {
        let observed = prot(&self.graph, &self.deployed()?, &self.queries)?;
        let alarm = f_check(&self.queries, &observed)?;
        let delta = diff_specs(&self.queries, &observed)?;
        let verdict = if alarm { Some(rb_classify(&delta, table)?) } else { None };
        Ok(Diagnosis { alarm, n_specs: self.queries.len(), violations: delta.kind_counts(), verdict })
    }

    pub fn to_json(&self) -> String {
        let doc = ScenarioJson {
            format: SCENARIO_FORMAT.into(),
            version: SCENARIO_VERSION,
            fault: self.fault,
            delta: self.delta,
            graph: serde_json::from_str(&self.graph.to_canonical_json()).expect("canonical graph JSON"),
            config: self.config.clone(),
            queries: serde_json::from_str(&self.queries.to_json()).expect("spec set JSON"),
        };
        serde_json::to_string_pretty(&doc).expect("scenarios always serialise")
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        let bad = |m: String| Error::Fault(FaultError::Format(m));
        let doc: ScenarioJson = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        if doc.format != SCENARIO_FORMAT || doc.version != SCENARIO_VERSION {
            return Err(bad(format!("unsupported format {} v{}", doc.format, doc.version)));
        }
        let graph = NetworkGraph::from_json(&doc.graph.to_string())?;
        doc.config.validate(&graph)?;
        let queries = SpecificationSet::from_json(&doc.queries.to_string())?;
        queries.validate(&graph)?;
        let s = Self { graph, config: doc.config, queries, fault: doc.fault, delta: doc.delta };
        s.deployed()?;
        Ok(s)
    }
}
