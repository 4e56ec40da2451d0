// SPDX-License-Identifier: Apache-2.0

//! Rule-based diagnosis: weighted matching of the violation mix against
//! per-fault symptom patterns.
//!
//! `score(f) = Σ_o w[f][o] · |ΔS_o| / |ΔS|` over the kinds `o ∈ {fwd, reach, iso}`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fault::{FaultClass, N_CLASSES};
use crate::specs::{DeltaS, SpecKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RbError {
    #[error("no violated specifications to diagnose")]
    EmptyDelta,
    #[error("weight for {class} {kind} is {value}, outside [0, 1]")]
    WeightOutOfRange { class: String, kind: String, value: f64 },
    #[error("weight table is missing {0}")]
    MissingCell(String),
    #[error("weight table parse error: {0}")]
    Parse(String),
}

/// Symptom weights `w[f][o]` for the seven fault classes (rows `f1..f7`)
/// and the three spec kinds (columns fwd, reach, iso).
#[derive(Clone, Debug, PartialEq)]
pub struct WeightTable {
    pub w: [[f64; 3]; N_CLASSES],
}

impl WeightTable {
    pub fn new(w: [[f64; 3]; N_CLASSES]) -> Result<Self, RbError> {
        let t = Self { w };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), RbError> {
        for (f, row) in self.w.iter().enumerate() {
            for (o, &value) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&value) {
                    return Err(RbError::WeightOutOfRange {
                        class: FaultClass::FAULTS[f].name().into(),
                        kind: SpecKind::ALL[o].name().into(),
                        value,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn get(&self, f: FaultClass, o: SpecKind) -> Option<f64> {
        f.label().map(|l| self.w[l][o.index()])
    }

    /// `{"f1": {"fwd": 0.9, "reach": 0.5, "iso": 0.4}, ...}`
    pub fn to_json(&self) -> String {
        let doc: BTreeMap<&str, BTreeMap<&str, f64>> = FaultClass::FAULTS
            .iter()
            .zip(&self.w)
            .map(|(f, row)| (f.name(), SpecKind::ALL.iter().map(|o| o.name()).zip(row.iter().copied()).collect()))
            .collect();
        serde_json::to_string_pretty(&doc).expect("weight tables always serialise")
    }

    pub fn from_json(text: &str) -> Result<Self, RbError> {
        let doc: BTreeMap<String, BTreeMap<String, f64>> =
            serde_json::from_str(text).map_err(|e| RbError::Parse(e.to_string()))?;
        let mut w = [[0.0; 3]; N_CLASSES];
        for (f, row) in FaultClass::FAULTS.iter().zip(w.iter_mut()) {
            let cells = doc.get(f.name()).ok_or_else(|| RbError::MissingCell(f.name().into()))?;
            for (o, cell) in SpecKind::ALL.iter().zip(row.iter_mut()) {
                *cell = *cells
                    .get(o.name())
                    .ok_or_else(|| RbError::MissingCell(format!("{}.{}", f.name(), o.name())))?;
            }
        }
        if let Some(extra) = doc.keys().find(|k| k.parse::<FaultClass>().ok().and_then(FaultClass::label).is_none()) {
            return Err(RbError::Parse(format!("unexpected class {extra:?}")));
        }
        Self::new(w)
    }
}

/// Shipped symptom weights. OSPF weight faults move shortest paths and so
/// mostly break forwarding; BGP attribute faults move egress choices and so
/// mostly break reachability through waypoints. The BGP rows share a base
/// pattern `(0.4, 0.8, 0.3)` with small fixed per-class offsets.
pub fn default_weight_table() -> WeightTable {
    WeightTable::new([
        [0.90, 0.50, 0.40],
        [0.40, 0.80, 0.30],
        [0.42, 0.78, 0.33],
        [0.37, 0.83, 0.29],
        [0.44, 0.76, 0.31],
        [0.38, 0.81, 0.35],
        [0.41, 0.77, 0.27],
    ])
    .expect("default table is in range")
}

/// Score differences at or below this are treated as ties.
pub const SCORE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RbVerdict {
    pub f_hat: FaultClass,
    /// Scores of `f1..f7`.
    pub scores: [f64; N_CLASSES],
    /// Whether another class shares the maximum score.
    pub tie: bool,
}

/// Score every fault class against a non-empty violation set. The first
/// maximum (smallest class index) wins.
pub fn rb_classify(delta: &DeltaS, weights: &WeightTable) -> Result<RbVerdict, RbError> {
    rb_classify_counts(delta.kind_counts(), weights)
}

/// [`rb_classify`] on per-kind violation counts.
pub fn rb_classify_counts(counts: [usize; 3], weights: &WeightTable) -> Result<RbVerdict, RbError> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(RbError::EmptyDelta);
    }
    let total = total as f64;
    let mut scores = [0.0; N_CLASSES];
    for (s, row) in scores.iter_mut().zip(&weights.w) {
        *s = row.iter().zip(&counts).map(|(w, &c)| w * c as f64).sum::<f64>() / total;
    }
    // Scores equal up to rounding count as ties, so the verdict does not
    // depend on the summation order.
    let mut best = 0;
    for f in 1..N_CLASSES {
        if scores[f] > scores[best] + SCORE_TOLERANCE {
            best = f;
        }
    }
    let tie = (0..N_CLASSES).any(|f| f != best && (scores[f] - scores[best]).abs() <= SCORE_TOLERANCE);
    Ok(RbVerdict { f_hat: FaultClass::FAULTS[best], scores, tie })
}

/// Dominant operation count of one diagnosis: `n_faults · n_violations`.
pub fn rb_complexity_estimate(n_faults: u64, n_violations: u64) -> u64 {
    n_faults * n_violations
}
