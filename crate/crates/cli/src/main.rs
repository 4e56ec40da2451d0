// SPDX-License-Identifier: Apache-2.0

//! `misconf`: dataset generation, training, evaluation, variant comparison,
//! runtime benchmarks and rule-based diagnosis.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use misconf::experiments::{
    median, run_compare, run_scaling, standard_test_sets, CompareConfig, ScalingConfig, TestSet,
};
use misconf::fault::{make_dataset, Dataset, DatasetMode, FaultClass, TopologySource};
use misconf::graph::{RouterCore, TopologyParams};
use misconf::graphml::load_zoo_dir;
use misconf::neuro::model::Hyperparams;
use misconf::neuro::train::{DatasetSource, SampleSource, StreamSource};
use misconf::neuro::{checkpoint, evaluate, prepare, train, GraphInput, NeuroError, TrainOptions, Variant};
use misconf::rb::{default_weight_table, WeightTable};
use misconf::rng::derive_seed;
use misconf::scenario::Scenario;
use misconf::Error;
use output::{write_atomic, CliError};
use serde::Serialize;

const ZOO_ENV: &str = "MISCONF_ZOO_DIR";
const DEFAULT_ZOO_DIR: &str = "data/topology_zoo";

#[derive(Parser)]
#[command(name = "misconf", version, about = "Routing misconfiguration laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labelled dataset as JSON Lines plus a manifest.
    Gen(GenArgs),
    /// Train one model variant and write a checkpoint and reports.
    Train(TrainArgs),
    /// Evaluate a checkpoint on one or more datasets.
    Eval(EvalArgs),
    /// Train every variant under the same seeds and compare sample efficiency.
    Compare(CompareArgs),
    /// Time inference and rule-based diagnosis across graph scales.
    Bench(BenchArgs),
    /// Run the specification check and the rule-based matcher on a scenario.
    Rb(RbArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Topology {
    Baseline,
    LargerScale,
    RealWorld,
}

impl Topology {
    fn name(self) -> &'static str {
        match self {
            Topology::Baseline => "baseline",
            Topology::LargerScale => "larger-scale",
            Topology::RealWorld => "real-world",
        }
    }

    /// Table sizes: 1024 training samples, 100 test samples otherwise.
    fn default_n(self) -> usize {
        match self {
            Topology::Baseline => 1024,
            _ => 100,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum HpPreset {
    /// Laptop-sized model: h=32, H=4.
    Desk,
    /// Original experiment settings: h=128, H=8, lr 1e-4, 400 epochs.
    Paper,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    /// Inject faults into configurations and run the protocols.
    Pregenerated,
    /// Inject faults directly into node features.
    OnTheFly,
}

impl From<Mode> for DatasetMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Pregenerated => DatasetMode::Pregenerated,
            Mode::OnTheFly => DatasetMode::OnTheFly,
        }
    }
}

#[derive(Args, Clone)]
struct ZooArgs {
    /// Directory of Topology Zoo GraphML files.
    #[arg(long, env = ZOO_ENV)]
    zoo_dir: Option<PathBuf>,
}

impl ZooArgs {
    fn load(&self) -> Result<Vec<(String, RouterCore)>, CliError> {
        let dir = self.zoo_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_ZOO_DIR));
        if !dir.is_dir() {
            return Err(CliError::missing(format!("Topology Zoo directory {} not found (set --zoo-dir or {ZOO_ENV})", dir.display())));
        }
        Ok(load_zoo_dir(&dir, 1).map_err(Error::from)?)
    }

    fn source(&self, t: Topology) -> Result<TopologySource, CliError> {
        Ok(match t {
            Topology::Baseline => TopologySource::Synthetic(TopologyParams::baseline()),
            Topology::LargerScale => TopologySource::Synthetic(TopologyParams::larger_scale()),
            Topology::RealWorld => TopologySource::Zoo { cores: self.load()?, params: TopologyParams::real_world() },
        })
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "baseline")]
    preset: Topology,
    /// Number of samples; 1024 for baseline, 100 otherwise.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "pregenerated")]
    mode: Mode,
    /// Output JSONL path; the manifest goes next to it.
    #[arg(long, short, default_value = "dataset.jsonl")]
    out: PathBuf,
    #[command(flatten)]
    zoo: ZooArgs,
}

#[derive(Args)]
struct HpArgs {
    #[arg(long, value_enum, default_value = "etagatv2")]
    variant: VariantArg,
    #[arg(long, value_enum, default_value = "desk")]
    preset: HpPreset,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    heads: Option<usize>,
    #[arg(long)]
    layers: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    dropout: Option<f64>,
    /// Add residual connections around each attention layer.
    #[arg(long)]
    residual: bool,
    /// Normalise attention separately within each edge type.
    #[arg(long)]
    per_type_softmax: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl HpArgs {
    fn hyperparams(&self) -> Hyperparams {
        let v = self.variant.into();
        let mut hp = match self.preset {
            HpPreset::Desk => Hyperparams::desk(v),
            HpPreset::Paper => Hyperparams::paper(v),
        };
        hp.seed = self.seed;
        hp.epochs = self.epochs.unwrap_or(hp.epochs);
        hp.learning_rate = self.lr.unwrap_or(hp.learning_rate);
        hp.hidden_dim = self.hidden.unwrap_or(hp.hidden_dim);
        hp.heads = self.heads.unwrap_or(hp.heads);
        hp.layers = self.layers.unwrap_or(hp.layers);
        hp.batch_size = self.batch.unwrap_or(hp.batch_size);
        hp.dropout_rate = self.dropout.unwrap_or(hp.dropout_rate);
        hp.residual = self.residual;
        hp.per_type_softmax = self.per_type_softmax;
        hp
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Gat,
    Gatv2,
    Etagat,
    Etagatv2,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Gat => Variant::Gat,
            VariantArg::Gatv2 => Variant::Gatv2,
            VariantArg::Etagat => Variant::Etagat,
            VariantArg::Etagatv2 => Variant::Etagatv2,
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    hp: HpArgs,
    /// Train on this dataset instead of a fresh stream.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Topologies of the training stream.
    #[arg(long, value_enum, default_value = "baseline")]
    topology: Topology,
    /// Stream samples per epoch.
    #[arg(long, default_value_t = 1024)]
    n: usize,
    /// Stop after this many samples.
    #[arg(long)]
    max_samples: Option<u64>,
    #[arg(long, default_value_t = 1024)]
    window: usize,
    #[arg(long, short, default_value = "run")]
    out: PathBuf,
    #[command(flatten)]
    zoo: ZooArgs,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    /// Datasets to evaluate; named by file stem. Without any, fresh
    /// baseline, larger-scale and real-world test sets are generated.
    #[arg(long)]
    data: Vec<PathBuf>,
    /// Samples per generated test set.
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output JSON; printed to stdout when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[command(flatten)]
    zoo: ZooArgs,
}

#[derive(Args)]
struct CompareArgs {
    /// Number of seeds; seeds are 0..N.
    #[arg(long, default_value_t = 3)]
    seeds: u64,
    #[arg(long, value_enum, num_args = 1.., default_values = ["gat", "gatv2", "etagat", "etagatv2"])]
    variants: Vec<VariantArg>,
    #[arg(long, value_enum, default_value = "desk")]
    preset: HpPreset,
    /// Samples consumed per run.
    #[arg(long, default_value_t = 20_000)]
    max_samples: u64,
    #[arg(long, default_value_t = 1024)]
    window: usize,
    #[arg(long, default_value_t = 0.8)]
    threshold: f64,
    /// Samples per zero-shot test set; 0 skips the evaluation.
    #[arg(long, default_value_t = 100)]
    test_n: usize,
    #[arg(long, default_value_t = 0)]
    test_seed: u64,
    #[arg(long, short, default_value = "compare")]
    out: PathBuf,
    #[command(flatten)]
    zoo: ZooArgs,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [1u32, 2, 4])]
    scales: Vec<u32>,
    #[arg(long, default_value_t = 5)]
    graphs: usize,
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV; fitted exponents go to the same path with a .json extension.
    #[arg(long, short, default_value = "bench.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct RbArgs {
    /// Scenario file; generated from the flags below when absent.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "baseline")]
    preset: Topology,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Injected fault class f0..f7; f0 injects nothing.
    #[arg(long, default_value = "f1")]
    fault: String,
    /// Template offset; drawn from the seed when absent.
    #[arg(long)]
    delta: Option<u32>,
    /// Diagnose this many consecutive seeds and print a summary.
    #[arg(long, default_value_t = 1)]
    count: u64,
    /// Weight table JSON; the built-in table when absent.
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Also write the generated scenario here.
    #[arg(long)]
    save_scenario: Option<PathBuf>,
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[command(flatten)]
    zoo: ZooArgs,
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::missing(format!("{}: {e}", path.display())))
}

fn load_dataset(path: &Path) -> Result<Dataset, CliError> {
    let f = std::fs::File::open(path).map_err(|e| CliError::missing(format!("{}: {e}", path.display())))?;
    Ok(Dataset::read_jsonl(std::io::BufReader::new(f)).map_err(Error::from)?)
}

fn prepare_all(ds: &Dataset) -> Result<Vec<GraphInput>, CliError> {
    Ok(ds.samples.iter().map(prepare).collect::<Result<Vec<_>, NeuroError>>().map_err(Error::from)?)
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data serialises");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct Manifest<'a> {
    format: &'static str,
    version: u32,
    preset: &'a str,
    mode: DatasetMode,
    n_samples: usize,
    seed: u64,
    /// Sample counts for f1..f7.
    class_histogram: [usize; 7],
    data_file: String,
    sha256: String,
}

fn cmd_gen(a: &GenArgs) -> Result<(), CliError> {
    let source = a.zoo.source(a.preset)?;
    let n = a.n.unwrap_or(a.preset.default_n());
    let ds = make_dataset(&source, n, a.mode.into(), a.seed).map_err(Error::from)?;
    let mut bytes = Vec::new();
    ds.write_jsonl(&mut bytes).map_err(Error::from)?;
    write_atomic(&a.out, &bytes)?;
    let manifest = Manifest {
        format: "misconf-dataset-manifest",
        version: 1,
        preset: a.preset.name(),
        mode: ds.header.mode,
        n_samples: ds.len(),
        seed: a.seed,
        class_histogram: ds.header.class_histogram,
        data_file: a.out.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
        sha256: output::sha256_hex(&bytes),
    };
    write_atomic(&output::manifest_path(&a.out), to_json(&manifest).as_bytes())?;
    eprintln!("wrote {} samples to {} (classes {:?})", ds.len(), a.out.display(), ds.header.class_histogram);
    Ok(())
}

#[derive(Serialize)]
struct TrainSummary {
    variant: &'static str,
    epochs: usize,
    samples_seen: u64,
    final_loss: f64,
    final_accuracy: f64,
    final_moving_accuracy: f64,
    report_checksum: String,
    params_checksum: String,
}

fn cmd_train(a: &TrainArgs) -> Result<(), CliError> {
    let hp = a.hp.hyperparams();
    hp.validate().map_err(Error::from)?;
    let opts = TrainOptions { max_samples: a.max_samples, window: a.window };
    let inputs;
    let mut stream;
    let mut dataset;
    let source: &mut dyn SampleSource = match &a.data {
        Some(path) => {
            inputs = prepare_all(&load_dataset(path)?)?;
            dataset = DatasetSource::new(&inputs, hp.seed);
            &mut dataset
        }
        None => {
            stream = StreamSource { source: a.zoo.source(a.topology)?, seed: derive_seed(hp.seed, 0x57e4), epoch_len: a.n };
            &mut stream
        }
    };
    let mut last_epoch = usize::MAX;
    let (params, report) = train(source, &hp, &opts, &mut |p, _| {
        if p.epoch != last_epoch {
            last_epoch = p.epoch;
            eprintln!("epoch {} (moving accuracy {:.3})", p.epoch + 1, p.moving_accuracy);
        }
        true
    })
    .map_err(Error::from)?;
    std::fs::create_dir_all(&a.out).map_err(Error::from)?;
    write_atomic(&a.out.join("checkpoint.json"), checkpoint::to_json(&params, &hp).as_bytes())?;
    write_atomic(&a.out.join("train_report.csv"), report.to_csv().as_bytes())?;
    write_atomic(&a.out.join("curve.csv"), report.curve_csv().as_bytes())?;
    let last = report.rows.last();
    let summary = TrainSummary {
        variant: hp.variant.name(),
        epochs: report.rows.len(),
        samples_seen: last.map_or(0, |r| r.samples_seen),
        final_loss: last.map_or(f64::NAN, |r| r.loss),
        final_accuracy: last.map_or(0.0, |r| r.acc),
        final_moving_accuracy: report.curve.last().map_or(0.0, |p| p.moving_accuracy),
        report_checksum: report.checksum(),
        params_checksum: report.params_checksum.clone(),
    };
    write_atomic(&a.out.join("summary.json"), to_json(&summary).as_bytes())?;
    eprintln!(
        "trained {} on {} samples: loss {:.4}, accuracy {:.3}; wrote {}",
        summary.variant,
        summary.samples_seen,
        summary.final_loss,
        summary.final_accuracy,
        a.out.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct EvalRow {
    dataset: String,
    n: usize,
    accuracy: f64,
    counts: Vec<Vec<usize>>,
    confusion: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct EvalReport {
    format: &'static str,
    version: u32,
    variant: &'static str,
    params_checksum: String,
    datasets: Vec<EvalRow>,
}

fn cmd_eval(a: &EvalArgs) -> Result<(), CliError> {
    let (params, hp) = checkpoint::from_json(&read_file(&a.checkpoint)?).map_err(Error::from)?;
    let sets: Vec<TestSet> = if a.data.is_empty() {
        standard_test_sets(a.zoo.load()?, a.n, a.seed)?
    } else {
        a.data
            .iter()
            .map(|p| {
                let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                Ok(TestSet { name, inputs: prepare_all(&load_dataset(p)?)? })
            })
            .collect::<Result<_, CliError>>()?
    };
    let datasets = sets
        .iter()
        .map(|t| {
            let e = evaluate(&params, &t.inputs)?;
            Ok(EvalRow { dataset: t.name.clone(), n: e.n, accuracy: e.accuracy, counts: e.counts, confusion: e.confusion })
        })
        .collect::<Result<Vec<_>, NeuroError>>()
        .map_err(Error::from)?;
    for d in &datasets {
        eprintln!("{:<14} n={:<5} accuracy {:.3}", d.dataset, d.n, d.accuracy);
    }
    let report = EvalReport { format: "misconf-eval", version: 1, variant: hp.variant.name(), params_checksum: params.checksum(), datasets };
    output::emit(a.out.as_deref(), &to_json(&report))
}

fn cmd_compare(a: &CompareArgs) -> Result<(), CliError> {
    let mut cfg = CompareConfig::desk((0..a.seeds).collect());
    cfg.variants = a.variants.iter().map(|&v| v.into()).collect();
    cfg.hp = match a.preset {
        HpPreset::Desk => Hyperparams::desk(Variant::Etagatv2),
        HpPreset::Paper => Hyperparams::paper(Variant::Etagatv2),
    };
    cfg.max_samples = a.max_samples;
    cfg.window = a.window;
    cfg.threshold = a.threshold;
    if a.seeds == 0 || cfg.variants.is_empty() || a.max_samples == 0 {
        return Err(CliError::infeasible("need at least one seed, one variant and one sample".into()));
    }
    let tests = if a.test_n == 0 { Vec::new() } else { standard_test_sets(a.zoo.load()?, a.test_n, a.test_seed)? };
    let mut last = (Variant::Gat, u64::MAX, 0u64);
    let report = run_compare(&cfg, &tests, &mut |v, seed, seen, acc| {
        if (v, seed) != (last.0, last.1) || seen >= last.2 + 2000 {
            last = (v, seed, seen);
            eprintln!("{:<9} seed {seed}: {seen} samples, moving accuracy {acc:.3}", v.name());
        }
    })?;
    std::fs::create_dir_all(&a.out).map_err(Error::from)?;
    write_atomic(&a.out.join("runs.csv"), report.runs_csv().as_bytes())?;
    write_atomic(&a.out.join("curves.csv"), report.curves_csv().as_bytes())?;
    let mut summary = format!(
        "variant,median_samples_to_{}pct{}\n",
        (a.threshold * 100.0).round(),
        tests.iter().map(|t| format!(",median_acc_{}", t.name)).collect::<String>()
    );
    for s in &report.summary {
        summary.push_str(&format!(
            "{},{}{}\n",
            s.variant.name(),
            s.median_samples_to_threshold.map(|x| x.to_string()).unwrap_or_default(),
            s.median_zero_shot.iter().map(|z| format!(",{}", z.1)).collect::<String>()
        ));
        let accs: Vec<f64> = report.runs.iter().filter(|r| r.variant == s.variant).map(|r| r.final_moving_accuracy).collect();
        eprintln!(
            "{:<9} median samples to {:.0}%: {}; median final moving accuracy {:.3}",
            s.variant.name(),
            a.threshold * 100.0,
            s.median_samples_to_threshold.map_or("not reached".into(), |x| x.to_string()),
            median(&accs)
        );
    }
    write_atomic(&a.out.join("summary.csv"), summary.as_bytes())?;
    write_atomic(&a.out.join("compare.json"), to_json(&report).as_bytes())?;
    Ok(())
}

fn cmd_bench(a: &BenchArgs) -> Result<(), CliError> {
    if a.scales.is_empty() || a.scales.contains(&0) || a.graphs == 0 || a.reps == 0 {
        return Err(CliError::infeasible("scales must be positive and graphs/reps at least 1".into()));
    }
    let cfg = ScalingConfig { scales: a.scales.clone(), graphs_per_scale: a.graphs, repetitions: a.reps, seed: a.seed, ..ScalingConfig::desk() };
    let report = run_scaling(&cfg)?;
    write_atomic(&a.out, report.to_csv().as_bytes())?;
    #[derive(Serialize)]
    struct Fits<'a> {
        scales: &'a [u32],
        gnn_vs_scale: &'a misconf::experiments::PowerFit,
        gnn_vs_nodes: &'a misconf::experiments::PowerFit,
        gnn_vs_size: &'a misconf::experiments::PowerFit,
        rb_vs_specs: &'a misconf::experiments::PowerFit,
    }
    let fits = Fits {
        scales: &a.scales,
        gnn_vs_scale: &report.gnn_vs_scale,
        gnn_vs_nodes: &report.gnn_vs_nodes,
        gnn_vs_size: &report.gnn_vs_size,
        rb_vs_specs: &report.rb_vs_specs,
    };
    write_atomic(&a.out.with_extension("json"), to_json(&fits).as_bytes())?;
    eprintln!(
        "etagatv2 time exponent: {:.2} vs scale factor, {:.2} vs |V|, {:.2} vs |E|+|V|; rb: {:.2} vs specifications",
        report.gnn_vs_scale.exponent, report.gnn_vs_nodes.exponent, report.gnn_vs_size.exponent, report.rb_vs_specs.exponent
    );
    Ok(())
}

#[derive(Serialize)]
struct RbSummary {
    fault: FaultClass,
    n_scenarios: u64,
    alarms: u64,
    /// Verdict counts for f1..f7 over alarmed scenarios.
    predicted: [u64; 7],
    ties: u64,
}

fn cmd_rb(a: &RbArgs) -> Result<ExitCode, CliError> {
    let table = match &a.weights {
        Some(p) => WeightTable::from_json(&read_file(p)?).map_err(Error::from)?,
        None => default_weight_table(),
    };
    let fault: FaultClass = a.fault.parse().map_err(|e: misconf::fault::FaultError| CliError::infeasible(e.to_string()))?;
    if a.count > 1 {
        let source = a.zoo.source(a.preset)?;
        let mut summary = RbSummary { fault, n_scenarios: a.count, alarms: 0, predicted: [0; 7], ties: 0 };
        for i in 0..a.count {
            let d = Scenario::generate(&source, a.seed + i, fault, a.delta)?.diagnose(&table)?;
            if let Some(v) = d.verdict {
                summary.alarms += 1;
                summary.predicted[v.f_hat.label().expect("verdicts name a fault")] += 1;
                summary.ties += v.tie as u64;
            }
        }
        output::emit(a.out.as_deref(), &to_json(&summary))?;
        return Ok(ExitCode::SUCCESS);
    }
    let scenario = match &a.scenario {
        Some(p) => Scenario::from_json(&read_file(p)?)?,
        None => Scenario::generate(&a.zoo.source(a.preset)?, a.seed, fault, a.delta)?,
    };
    if let Some(p) = &a.save_scenario {
        write_atomic(p, scenario.to_json().as_bytes())?;
    }
    let d = scenario.diagnose(&table)?;
    output::emit(a.out.as_deref(), &to_json(&d))?;
    match &d.verdict {
        None => {
            eprintln!("no misconfiguration: all {} specifications hold", d.n_specs);
            Ok(ExitCode::from(output::EXIT_NO_ALARM))
        }
        Some(v) => {
            eprintln!("violations fwd/reach/iso {:?}; verdict {} ({})", d.violations, v.f_hat.name(), v.f_hat.template());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match &cli.command {
        Command::Gen(a) => cmd_gen(a)?,
        Command::Train(a) => cmd_train(a)?,
        Command::Eval(a) => cmd_eval(a)?,
        Command::Compare(a) => cmd_compare(a)?,
        Command::Bench(a) => cmd_bench(a)?,
        Command::Rb(a) => return cmd_rb(a),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
