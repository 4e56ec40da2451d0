// SPDX-License-Identifier: Apache-2.0

//! Minibatch training, evaluation and training reports.

use std::collections::VecDeque;
use std::time::Instant;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::features::{prepare, GraphInput};
use super::model::{hex, loss_and_grads, predict, argmax, Hyperparams, ModelParams};
use super::optim::{adam_step, AdamState};
use super::NeuroError;
use crate::fault::{make_sample, DatasetMode, TopologySource};
use crate::rng::{derive_seed, seeded};

/// Supplies training graphs epoch by epoch.
pub trait SampleSource {
    fn epoch_len(&self) -> usize;
    /// Sample `i` of epoch `epoch`.
    fn sample(&mut self, epoch: usize, i: usize) -> Result<GraphInput, NeuroError>;
}

/// A fixed dataset, reshuffled every epoch.
pub struct DatasetSource<'a> {
    inputs: &'a [GraphInput],
    seed: u64,
    order: Vec<usize>,
    order_epoch: Option<usize>,
}

impl<'a> DatasetSource<'a> {
    pub fn new(inputs: &'a [GraphInput], seed: u64) -> Self {
        Self { inputs, seed, order: (0..inputs.len()).collect(), order_epoch: None }
    }
}

impl SampleSource for DatasetSource<'_> {
    fn epoch_len(&self) -> usize {
        self.inputs.len()
    }

    fn sample(&mut self, epoch: usize, i: usize) -> Result<GraphInput, NeuroError> {
        if self.order_epoch != Some(epoch) {
            self.order = (0..self.inputs.len()).collect();
            self.order.shuffle(&mut seeded(derive_seed(self.seed, epoch as u64)));
            self.order_epoch = Some(epoch);
        }
        Ok(self.inputs[self.order[i]].clone())
    }
}

/// Fresh topologies with feature-level fault injection; sample
/// `epoch · epoch_len + i` of the seeded stream.
pub struct StreamSource {
    pub source: TopologySource,
    pub seed: u64,
    pub epoch_len: usize,
}

impl SampleSource for StreamSource {
    fn epoch_len(&self) -> usize {
        self.epoch_len
    }

    fn sample(&mut self, epoch: usize, i: usize) -> Result<GraphInput, NeuroError> {
        let index = (epoch * self.epoch_len + i) as u64;
        let s = make_sample(&self.source, DatasetMode::OnTheFly, self.seed, index)
            .map_err(|e| NeuroError::Data(e.to_string()))?;
        prepare(&s)
    }
}

/// Training state after each optimiser step.
#[derive(Clone, Debug)]
pub struct Progress {
    pub epoch: usize,
    pub step: u64,
    pub samples_seen: u64,
    pub batch_loss: f64,
    /// Accuracy over the most recent `window` training predictions.
    pub moving_accuracy: f64,
    /// Whether the moving window is full.
    pub window_full: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRow {
    pub epoch: usize,
    pub samples_seen: u64,
    pub loss: f64,
    pub acc: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub samples_seen: u64,
    pub moving_accuracy: f64,
    pub batch_loss: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub rows: Vec<EpochRow>,
    pub curve: Vec<CurvePoint>,
    pub wall_time_s: f64,
    pub params_checksum: String,
}

impl TrainReport {
    /// `epoch,samples_seen,loss,acc`
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epoch,samples_seen,loss,acc\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{},{}\n", r.epoch, r.samples_seen, r.loss, r.acc));
        }
        s
    }

    /// `samples_seen,moving_accuracy,batch_loss`
    pub fn curve_csv(&self) -> String {
        let mut s = String::from("samples_seen,moving_accuracy,batch_loss\n");
        for p in &self.curve {
            s.push_str(&format!("{},{},{}\n", p.samples_seen, p.moving_accuracy, p.batch_loss));
        }
        s
    }

    /// Hash of everything except wall time.
    pub fn checksum(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.to_csv().as_bytes());
        h.update(self.curve_csv().as_bytes());
        h.update(self.params_checksum.as_bytes());
        hex(&h.finalize())
    }

    pub fn last_accuracy(&self) -> Option<f64> {
        self.rows.last().map(|r| r.acc)
    }
}

#[derive(Clone, Debug)]
pub struct TrainOptions {
    /// Stop after this many samples even if epochs remain.
    pub max_samples: Option<u64>,
    /// Window of the moving training accuracy.
    pub window: usize,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self { max_samples: None, window: 1024 }
    }
}

/// Train from freshly initialised parameters.
pub fn train(
    source: &mut dyn SampleSource,
    hp: &Hyperparams,
    opts: &TrainOptions,
    observer: &mut dyn FnMut(&Progress, &ModelParams) -> bool,
) -> Result<(ModelParams, TrainReport), NeuroError> {
    hp.validate()?;
    let params = ModelParams::init(hp.architecture(), hp.seed);
    train_from(params, source, hp, opts, observer)
}

/// Train starting from given parameters.
pub fn train_from(
    mut params: ModelParams,
    source: &mut dyn SampleSource,
    hp: &Hyperparams,
    opts: &TrainOptions,
    observer: &mut dyn FnMut(&Progress, &ModelParams) -> bool,
) -> Result<(ModelParams, TrainReport), NeuroError> {
    hp.validate()?;
    let start = Instant::now();
    let mut adam = AdamState::new(params.n_params());
    let epoch_len = source.epoch_len();
    if epoch_len == 0 {
        return Err(NeuroError::EmptyBatch);
    }
    let mut rows = Vec::new();
    let mut curve = Vec::new();
    let mut window: VecDeque<bool> = VecDeque::with_capacity(opts.window);
    let mut window_correct = 0usize;
    let mut samples_seen = 0u64;
    let mut step = 0u64;
    let mut stop = false;

    'epochs: for epoch in 0..hp.epochs {
        let (mut loss_sum, mut correct, mut seen) = (0.0, 0usize, 0usize);
        let mut i = 0;
        while i < epoch_len {
            let mut take = hp.batch_size.min(epoch_len - i);
            if let Some(max) = opts.max_samples {
                take = take.min(max.saturating_sub(samples_seen) as usize);
            }
            if take == 0 {
                stop = true;
                break;
            }
            let batch: Vec<GraphInput> = (i..i + take).map(|j| source.sample(epoch, j)).collect::<Result<_, _>>()?;
            let refs: Vec<&GraphInput> = batch.iter().collect();
            let mut rng = seeded(derive_seed(hp.seed ^ 0xd20f_0a7e, step));
            let dropout = (hp.dropout_rate > 0.0).then_some((hp.dropout_rate, &mut rng));
            let r = match loss_and_grads(&params, &refs, hp.label_smoothing, dropout) {
                Err(NeuroError::NonFiniteLoss) => {
                    return Err(NeuroError::Diverged { step, samples_seen });
                }
                other => other?,
            };
            adam_step(&mut params.data, &r.grads, &mut adam, hp.learning_rate, hp.weight_decay)?;
            if params.data.iter().any(|x| !x.is_finite()) {
                return Err(NeuroError::Diverged { step, samples_seen });
            }

            for (p, g) in r.predictions.iter().zip(&batch) {
                let ok = g.label == Some(*p);
                if window.len() == opts.window {
                    if window.pop_front() == Some(true) {
                        window_correct -= 1;
                    }
                }
                window.push_back(ok);
                window_correct += ok as usize;
                correct += ok as usize;
            }
            loss_sum += r.loss * take as f64;
            seen += take;
            samples_seen += take as u64;
            step += 1;
            i += take;

            let progress = Progress {
                epoch,
                step,
                samples_seen,
                batch_loss: r.loss,
                moving_accuracy: window_correct as f64 / window.len() as f64,
                window_full: window.len() == opts.window,
            };
            curve.push(CurvePoint {
                samples_seen,
                moving_accuracy: progress.moving_accuracy,
                batch_loss: r.loss,
            });
            if !observer(&progress, &params) {
                stop = true;
            }
            if stop {
                break;
            }
        }
        if seen > 0 {
            rows.push(EpochRow { epoch, samples_seen, loss: loss_sum / seen as f64, acc: correct as f64 / seen as f64 });
        }
        if stop {
            break 'epochs;
        }
    }

    let report = TrainReport {
        rows,
        curve,
        wall_time_s: start.elapsed().as_secs_f64(),
        params_checksum: params.checksum(),
    };
    Ok((params, report))
}

/// Accuracy and confusion matrix over labelled graphs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub accuracy: f64,
    pub n: usize,
    /// `counts[true][predicted]`.
    pub counts: Vec<Vec<usize>>,
    /// Row-normalised `counts` (rows with no samples stay zero).
    pub confusion: Vec<Vec<f64>>,
}

pub fn evaluate(params: &ModelParams, inputs: &[GraphInput]) -> Result<Evaluation, NeuroError> {
    if inputs.is_empty() {
        return Err(NeuroError::EmptyBatch);
    }
    let c = params.arch.n_classes;
    let mut counts = vec![vec![0usize; c]; c];
    let mut correct = 0;
    for g in inputs {
        let y = g.label.ok_or(NeuroError::MissingLabel)?;
        let p = argmax(&predict(params, g)?);
        counts[y][p] += 1;
        correct += (p == y) as usize;
    }
    let confusion = counts
        .iter()
        .map(|row| {
            let total: usize = row.iter().sum();
            row.iter().map(|&x| if total == 0 { 0.0 } else { x as f64 / total as f64 }).collect()
        })
        .collect();
    Ok(Evaluation { accuracy: correct as f64 / inputs.len() as f64, n: inputs.len(), counts, confusion })
}

/// First sample count at which a full moving window reached `threshold`.
pub fn samples_to_threshold(curve: &[CurvePoint], window: usize, threshold: f64) -> Option<u64> {
    curve
        .iter()
        .find(|p| p.samples_seen >= window as u64 && p.moving_accuracy >= threshold)
        .map(|p| p.samples_seen)
}
