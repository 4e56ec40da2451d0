// SPDX-License-Identifier: Apache-2.0

//! Experiment harnesses shared by the command-line tool and the acceptance
//! suite: multi-variant sample-efficiency comparison with zero-shot
//! evaluation, and runtime-scaling sweeps.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::fault::{make_dataset, make_sample, DatasetMode, FaultClass, TopologySource};
use crate::graph::{RouterCore, TopologyParams};
use crate::neuro::model::{predict, Hyperparams, ModelParams};
use crate::neuro::train::{samples_to_threshold, StreamSource};
use crate::neuro::{evaluate, prepare, train, GraphInput, NeuroError, TrainOptions, TrainReport, Variant};
use crate::protocol::prot;
use crate::rb::{default_weight_table, rb_classify};
use crate::rng::derive_seed;
use crate::specs::{diff_specs, generate_queries_clamped};
use crate::Error;

/// A named labelled test set.
#[derive(Clone, Debug)]
pub struct TestSet {
    pub name: String,
    pub inputs: Vec<GraphInput>,
}

/// Build `n` feature-level samples from a topology source.
pub fn build_test_set(name: &str, source: &TopologySource, n: usize, seed: u64) -> Result<TestSet, Error> {
    let ds = make_dataset(source, n, DatasetMode::OnTheFly, seed)?;
    let inputs = ds.samples.iter().map(prepare).collect::<Result<_, _>>()?;
    Ok(TestSet { name: name.to_string(), inputs })
}

/// Held-out baseline, larger-scale and real-world test sets with `n` samples
/// each. Real-world graphs are built from the given router cores.
pub fn standard_test_sets(zoo: Vec<(String, RouterCore)>, n: usize, seed: u64) -> Result<Vec<TestSet>, Error> {
    Ok(vec![
        build_test_set("baseline", &TopologySource::Synthetic(TopologyParams::baseline()), n, derive_seed(seed, 1))?,
        build_test_set("larger-scale", &TopologySource::Synthetic(TopologyParams::larger_scale()), n, derive_seed(seed, 2))?,
        build_test_set("real-world", &TopologySource::Zoo { cores: zoo, params: TopologyParams::real_world() }, n, derive_seed(seed, 3))?,
    ])
}

#[derive(Clone, Debug)]
pub struct CompareConfig {
    pub variants: Vec<Variant>,
    pub seeds: Vec<u64>,
    /// Hyperparameters shared by every run; variant and seed are overridden.
    pub hp: Hyperparams,
    pub train_source: TopologySource,
    /// Samples consumed per run.
    pub max_samples: u64,
    pub window: usize,
    pub threshold: f64,
}

impl CompareConfig {
    /// Desk-scale defaults: h=32, H=4, L=2, batch 4, 2·10⁴ samples, 80%.
    pub fn desk(seeds: Vec<u64>) -> Self {
        Self {
            variants: Variant::ALL.to_vec(),
            seeds,
            hp: Hyperparams::desk(Variant::Etagatv2),
            train_source: TopologySource::Synthetic(TopologyParams::baseline()),
            max_samples: 20_000,
            window: 1024,
            threshold: 0.8,
        }
    }

    /// Stream seed for a run seed; identical for every variant so all
    /// variants see the same samples in the same order.
    pub fn stream_seed(seed: u64) -> u64 {
        derive_seed(seed, 0x57e4)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunResult {
    pub variant: Variant,
    pub seed: u64,
    /// First consumed-sample count at which a full moving window reached the
    /// threshold; `None` when the budget ran out first.
    pub samples_to_threshold: Option<u64>,
    pub final_moving_accuracy: f64,
    /// Accuracy per test set, in configuration order.
    pub zero_shot: Vec<(String, f64)>,
    pub wall_time_s: f64,
    pub report_checksum: String,
    #[serde(skip)]
    pub report: Option<TrainReport>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VariantSummary {
    pub variant: Variant,
    /// Median samples-to-threshold; `None` when the median run did not reach
    /// the threshold within the budget.
    pub median_samples_to_threshold: Option<u64>,
    pub median_zero_shot: Vec<(String, f64)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CompareReport {
    pub max_samples: u64,
    pub threshold: f64,
    pub window: usize,
    pub runs: Vec<RunResult>,
    pub summary: Vec<VariantSummary>,
}

/// Median with unreached runs ordered after every reached one.
pub fn median_censored(values: &[Option<u64>]) -> Option<u64> {
    let mut v: Vec<u64> = values.iter().map(|x| x.unwrap_or(u64::MAX)).collect();
    v.sort_unstable();
    let m = *v.get(v.len().saturating_sub(1) / 2)?;
    if v.len() % 2 == 0 {
        let hi = v[v.len() / 2];
        if m == u64::MAX || hi == u64::MAX {
            return None;
        }
        return Some((m + hi) / 2);
    }
    (m != u64::MAX).then_some(m)
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Train one run and evaluate it on every test set.
pub fn run_one(
    cfg: &CompareConfig,
    variant: Variant,
    seed: u64,
    tests: &[TestSet],
    progress: &mut dyn FnMut(Variant, u64, u64, f64),
) -> Result<RunResult, Error> {
    let hp = Hyperparams { variant, seed, epochs: 1, ..cfg.hp.clone() };
    let mut source = StreamSource {
        source: cfg.train_source.clone(),
        seed: CompareConfig::stream_seed(seed),
        epoch_len: cfg.max_samples as usize,
    };
    let opts = TrainOptions { max_samples: Some(cfg.max_samples), window: cfg.window };
    let (params, report) = train(&mut source, &hp, &opts, &mut |p, _| {
        progress(variant, seed, p.samples_seen, p.moving_accuracy);
        true
    })?;
    let zero_shot = tests
        .iter()
        .map(|t| Ok((t.name.clone(), evaluate(&params, &t.inputs)?.accuracy)))
        .collect::<Result<Vec<_>, NeuroError>>()?;
    Ok(RunResult {
        variant,
        seed,
        samples_to_threshold: samples_to_threshold(&report.curve, cfg.window, cfg.threshold),
        final_moving_accuracy: report.curve.last().map_or(0.0, |p| p.moving_accuracy),
        zero_shot,
        wall_time_s: report.wall_time_s,
        report_checksum: report.checksum(),
        report: Some(report),
    })
}

/// Train every variant under every seed on the same stream and summarise.
pub fn run_compare(
    cfg: &CompareConfig,
    tests: &[TestSet],
    progress: &mut dyn FnMut(Variant, u64, u64, f64),
) -> Result<CompareReport, Error> {
    let mut runs = Vec::new();
    for &seed in &cfg.seeds {
        for &variant in &cfg.variants {
            runs.push(run_one(cfg, variant, seed, tests, progress)?);
        }
    }
    let summary = cfg
        .variants
        .iter()
        .map(|&variant| {
            let mine: Vec<&RunResult> = runs.iter().filter(|r| r.variant == variant).collect();
            let stt: Vec<Option<u64>> = mine.iter().map(|r| r.samples_to_threshold).collect();
            let median_zero_shot = tests
                .iter()
                .enumerate()
                .map(|(i, t)| (t.name.clone(), median(&mine.iter().map(|r| r.zero_shot[i].1).collect::<Vec<_>>())))
                .collect();
            VariantSummary { variant, median_samples_to_threshold: median_censored(&stt), median_zero_shot }
        })
        .collect();
    Ok(CompareReport { max_samples: cfg.max_samples, threshold: cfg.threshold, window: cfg.window, runs, summary })
}

impl CompareReport {
    pub fn summary_for(&self, v: Variant) -> Option<&VariantSummary> {
        self.summary.iter().find(|s| s.variant == v)
    }

    /// `variant,seed,samples_to_80pct,final_moving_accuracy,<test sets…>`;
    /// unreached thresholds are left empty.
    pub fn runs_csv(&self) -> String {
        let names: Vec<String> = self.runs.first().map(|r| r.zero_shot.iter().map(|z| format!("acc_{}", z.0)).collect()).unwrap_or_default();
        let mut s = format!("variant,seed,samples_to_80pct,final_moving_accuracy{}\n", names.iter().map(|n| format!(",{n}")).collect::<String>());
        for r in &self.runs {
            s.push_str(&format!(
                "{},{},{},{}{}\n",
                r.variant.name(),
                r.seed,
                r.samples_to_threshold.map(|x| x.to_string()).unwrap_or_default(),
                r.final_moving_accuracy,
                r.zero_shot.iter().map(|z| format!(",{}", z.1)).collect::<String>()
            ));
        }
        s
    }

    /// `variant,seed,samples_seen,moving_accuracy` for every logged step.
    pub fn curves_csv(&self) -> String {
        let mut s = String::from("variant,seed,samples_seen,moving_accuracy\n");
        for r in &self.runs {
            if let Some(rep) = &r.report {
                for p in &rep.curve {
                    s.push_str(&format!("{},{},{},{}\n", r.variant.name(), r.seed, p.samples_seen, p.moving_accuracy));
                }
            }
        }
        s
    }
}

/// Scaling sweep settings.
#[derive(Clone, Debug)]
pub struct ScalingConfig {
    pub scales: Vec<u32>,
    pub graphs_per_scale: usize,
    pub repetitions: usize,
    pub base: TopologyParams,
    pub hp: Hyperparams,
    pub seed: u64,
}

impl ScalingConfig {
    pub fn desk() -> Self {
        Self {
            scales: vec![1, 2, 4],
            graphs_per_scale: 5,
            repetitions: 5,
            base: TopologyParams::baseline(),
            hp: Hyperparams::desk(Variant::Etagatv2),
            seed: 0,
        }
    }
}

/// Base parameters with router, destination, gateway and query ranges
/// multiplied by `factor`.
pub fn scaled_params(base: &TopologyParams, factor: u32) -> TopologyParams {
    let mut p = base.clone();
    p.router_range = base.router_range.scaled(factor);
    p.dst_range = base.dst_range.scaled(factor);
    p.gateway_count = base.gateway_count.scaled(factor);
    p.query_counts.fwd = base.query_counts.fwd.scaled(factor);
    p.query_counts.reach = base.query_counts.reach.scaled(factor);
    p.query_counts.iso = base.query_counts.iso.scaled(factor);
    p
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub algorithm: String,
    pub scale: u32,
    pub graph: usize,
    pub repetition: usize,
    pub n_nodes: usize,
    /// Message-passing edges (GNN) or specifications checked (RB).
    pub n_edges: usize,
    /// Size the complexity is stated in: `|E| + |V|` for the GNN,
    /// `|F| · |ΔS|` operations for RB.
    pub work: u64,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub r_squared: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// GNN inference time against the scale factor.
    pub gnn_vs_scale: PowerFit,
    /// GNN inference time against `|E| + |V|`.
    pub gnn_vs_size: PowerFit,
    /// GNN inference time against `|V|`.
    pub gnn_vs_nodes: PowerFit,
    /// Diagnosis time (diff plus scoring) against the number of
    /// specifications checked.
    pub rb_vs_specs: PowerFit,
}

/// Least-squares fit of `log y = k · log x + c`.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> PowerFit {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let k = sxy / sxx;
    let r2 = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    PowerFit { exponent: k, r_squared: r2 }
}

fn seconds(mut f: impl FnMut()) -> f64 {
    let t = Instant::now();
    f();
    t.elapsed().as_secs_f64()
}

/// Time GNN inference and rule-based diagnosis across graph scales.
///
/// Each row is one timing of one graph, averaged over enough back-to-back
/// calls to sit well above timer resolution. Fits use the fastest repetition
/// of each graph.
pub fn run_scaling(cfg: &ScalingConfig) -> Result<BenchReport, Error> {
    struct Case {
        scale: u32,
        graph: usize,
        input: GraphInput,
        inner: usize,
        n_nodes: usize,
        queries: crate::specs::SpecificationSet,
        observed: crate::specs::ObservedSpecs,
        n_violations: usize,
    }
    let params = ModelParams::init(cfg.hp.architecture(), cfg.seed);
    let table = default_weight_table();
    let mut cases = Vec::new();
    for &scale in &cfg.scales {
        let source = TopologySource::Synthetic(scaled_params(&cfg.base, scale));
        for gi in 0..cfg.graphs_per_scale {
            let sample = make_sample(&source, DatasetMode::OnTheFly, derive_seed(cfg.seed, scale as u64), gi as u64)?;
            let input = prepare(&sample)?;
            // Rule-based diagnosis of an OSPF template fault on the same graph.
            let (graph, _) = source.topology(sample.meta.graph_id)?;
            let config = crate::fault::sample_true_config(&graph, derive_seed(sample.meta.seed, 1));
            let qc = source.params().query_counts;
            let counts = [qc.fwd.hi as usize, qc.reach.hi as usize, qc.iso.hi as usize];
            let (queries, _) = generate_queries_clamped(&graph, &config, counts, derive_seed(sample.meta.seed, 4))?;
            let faulty = crate::fault::inject_config_fault_with(&config, FaultClass::F1, 4)?;
            let observed = prot(&graph, &faulty, &queries)?;
            let n_violations = diff_specs(&queries, &observed)?.len();
            let inner = (200_000 / (input.structure.n_edges() + input.n())).clamp(1, 200);
            cases.push(Case { scale, graph: gi, input, inner, n_nodes: graph.node_count(), queries, observed, n_violations });
        }
    }

    // Repetitions sweep every case in turn so slow drift in machine speed
    // spreads evenly over all scales.
    let mut rows = Vec::new();
    let mut sink = 0.0;
    for rep in 0..cfg.repetitions {
        for c in &cases {
            let (e, v) = (c.input.structure.n_edges(), c.input.n());
            let t = seconds(|| {
                for _ in 0..c.inner {
                    sink += predict(&params, std::hint::black_box(&c.input)).expect("prepared input")[0];
                }
            }) / c.inner as f64;
            rows.push(BenchRow {
                algorithm: "etagatv2".into(),
                scale: c.scale,
                graph: c.graph,
                repetition: rep,
                n_nodes: v,
                n_edges: e,
                work: (e + v) as u64,
                seconds: t,
            });

            let inner = 2000;
            let t = seconds(|| {
                for _ in 0..inner {
                    let d = diff_specs(std::hint::black_box(&c.queries), std::hint::black_box(&c.observed)).expect("aligned");
                    if !d.is_empty() {
                        std::hint::black_box(rb_classify(&d, &table).expect("non-empty"));
                    }
                }
            }) / inner as f64;
            rows.push(BenchRow {
                algorithm: "rb".into(),
                scale: c.scale,
                graph: c.graph,
                repetition: rep,
                n_nodes: c.n_nodes,
                n_edges: c.queries.len(),
                work: crate::rb::rb_complexity_estimate(7, c.n_violations as u64),
                seconds: t,
            });
        }
    }
    std::hint::black_box(sink);
    rows.sort_by(|a, b| (&a.algorithm, a.scale, a.graph, a.repetition).cmp(&(&b.algorithm, b.scale, b.graph, b.repetition)));
    // One point per graph: the fastest repetition.
    let best = |alg: &str| -> Vec<&BenchRow> {
        let mut out: Vec<&BenchRow> = Vec::new();
        for r in rows.iter().filter(|r| r.algorithm == alg) {
            match out.iter_mut().find(|o| o.scale == r.scale && o.graph == r.graph) {
                Some(o) if r.seconds < o.seconds => *o = r,
                Some(_) => {}
                None => out.push(r),
            }
        }
        out
    };
    let gnn = best("etagatv2");
    let t: Vec<f64> = gnn.iter().map(|r| r.seconds).collect();
    let gnn_vs_size = fit_power_law(&gnn.iter().map(|r| r.work as f64).collect::<Vec<_>>(), &t);
    let gnn_vs_scale = fit_power_law(&gnn.iter().map(|r| r.scale as f64).collect::<Vec<_>>(), &t);
    let gnn_vs_nodes = fit_power_law(&gnn.iter().map(|r| r.n_nodes as f64).collect::<Vec<_>>(), &t);
    let rb = best("rb");
    let rb_vs_specs = fit_power_law(
        &rb.iter().map(|r| r.n_edges as f64).collect::<Vec<_>>(),
        &rb.iter().map(|r| r.seconds).collect::<Vec<_>>(),
    );
    Ok(BenchReport { rows, gnn_vs_size, gnn_vs_scale, gnn_vs_nodes, rb_vs_specs })
}

impl BenchReport {
    /// One row per (algorithm, scale, graph, repetition).
    pub fn to_csv(&self) -> String {
        let mut s = String::from("algorithm,scale,graph,repetition,n_nodes,n_edges,work,seconds\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{:e}\n",
                r.algorithm, r.scale, r.graph, r.repetition, r.n_nodes, r.n_edges, r.work, r.seconds
            ));
        }
        s
    }
}
