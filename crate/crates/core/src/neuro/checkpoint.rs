// SPDX-License-Identifier: Apache-2.0

//! JSON checkpoints: format version, hyperparameters, architecture, a shape
//! manifest and the tensors themselves.

use serde::{Deserialize, Serialize};

use super::model::{Architecture, Hyperparams, ModelParams, TensorSpec};
use super::NeuroError;

pub const CHECKPOINT_FORMAT: &str = "misconf-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct TensorDump {
    name: String,
    shape: Vec<usize>,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct CheckpointDoc {
    format: String,
    version: u32,
    hyperparams: Hyperparams,
    architecture: Architecture,
    n_params: usize,
    checksum: String,
    tensors: Vec<TensorDump>,
}

pub fn to_json(params: &ModelParams, hp: &Hyperparams) -> String {
    let doc = CheckpointDoc {
        format: CHECKPOINT_FORMAT.into(),
        version: CHECKPOINT_VERSION,
        hyperparams: hp.clone(),
        architecture: params.arch,
        n_params: params.n_params(),
        checksum: params.checksum(),
        tensors: params
            .manifest
            .iter()
            .map(|t: &TensorSpec| TensorDump { name: t.name.clone(), shape: t.shape.clone(), data: params.data[t.range()].to_vec() })
            .collect(),
    };
    serde_json::to_string(&doc).expect("checkpoints always serialise")
}

pub fn from_json(text: &str) -> Result<(ModelParams, Hyperparams), NeuroError> {
    let bad = |m: String| NeuroError::Checkpoint(m);
    let doc: CheckpointDoc = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    if doc.format != CHECKPOINT_FORMAT || doc.version != CHECKPOINT_VERSION {
        return Err(bad(format!("unsupported checkpoint {} v{}", doc.format, doc.version)));
    }
    let manifest = doc.architecture.manifest();
    if manifest.len() != doc.tensors.len() {
        return Err(bad(format!("expected {} tensors, found {}", manifest.len(), doc.tensors.len())));
    }
    let mut data = Vec::with_capacity(doc.n_params);
    for (spec, t) in manifest.iter().zip(doc.tensors) {
        if spec.name != t.name || spec.shape != t.shape || t.data.len() != spec.len {
            return Err(bad(format!("tensor {} does not match the manifest entry {}", t.name, spec.name)));
        }
        data.extend(t.data);
    }
    let params = ModelParams::from_data(doc.architecture, data)?;
    if params.checksum() != doc.checksum {
        return Err(bad("checksum mismatch".into()));
    }
    Ok((params, doc.hyperparams))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neuro::layer::Variant;

    #[test]
    fn round_trip() {
        let hp = Hyperparams::desk(Variant::Etagatv2);
        let p = ModelParams::init(hp.architecture(), 4);
        let text = to_json(&p, &hp);
        let (q, hq) = from_json(&text).unwrap();
        assert_eq!(q, p);
        assert_eq!(hq, hp);
        let tampered = text.replacen("\"data\":[", "\"data\":[1.5,", 1);
        assert!(from_json(&tampered).is_err());
    }
}
