//! `dmnn`: train, apply and inspect discrete morphological neural networks.
//!
//! Exit codes: 0 success, 1 usage or config error, 2 data error, 3 refusal
//! by a size guard (window cap or basis budget).

mod config;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use dmnn::architecture::{
    compile, deserialize_params, init_params, serialize_params, ArchitectureSpec, ParamVector,
};
use dmnn::dataset::{load_pairs, read_pbm, write_corpus, write_pbm, CorpusSpec, ShapeKind};
use dmnn::lattice::text::format_collection;
use dmnn::mcg::json::graph_from_json;
use dmnn::mcg::{basis_with_limits, evaluate, evaluate_all, validate, BasisLimits, McgError, ValidGraph};
use dmnn::training::{
    mean_loss, ratio_f64, stream_rng, train, Loss, SamplePair, TrainError, CSV_HEADER, STREAM_INIT,
};
use serde_json::json;

use config::{parse_json, ConfigError, ExperimentConfig};

#[derive(Parser)]
#[command(name = "dmnn", version, about = "Discrete morphological neural networks")]
struct Cli {
    /// Worker threads for loss evaluation. Affects speed only.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus of noisy shapes and boundary targets.
    Synth(SynthArgs),
    /// Train an architecture as described by an experiment config.
    Train(TrainArgs),
    /// Apply trained parameters to one image.
    Apply(ApplyArgs),
    /// Mean loss of trained parameters on a corpus directory.
    Eval(EvalArgs),
    /// Print the window and basis of a graph or of trained parameters.
    Basis(BasisArgs),
    /// Write the output of every layer for one input image.
    Trace(TraceArgs),
    /// Check a graph file, a config, or a params file against an architecture.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Corpus spec JSON; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    #[arg(long)]
    noise: Option<f64>,
    /// blobs or digits-font
    #[arg(long)]
    shape: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides train.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides output_dir.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ModelArgs {
    /// Architecture JSON, or an experiment config holding one.
    #[arg(long)]
    arch: PathBuf,
    #[arg(long)]
    params: PathBuf,
}

#[derive(Args)]
struct ApplyArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    data: PathBuf,
    /// iou or absolute
    #[arg(long, default_value = "iou")]
    loss: String,
    /// Also write the result JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BasisArgs {
    /// Graph JSON file.
    #[arg(long, conflicts_with_all = ["arch", "params"])]
    graph: Option<PathBuf>,
    #[arg(long, requires = "params")]
    arch: Option<PathBuf>,
    #[arg(long, requires = "arch")]
    params: Option<PathBuf>,
    #[arg(long, default_value_t = BasisLimits::default().max_window)]
    max_window: usize,
    #[arg(long, default_value_t = BasisLimits::default().max_intervals)]
    max_intervals: usize,
    /// Write the dump here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TraceArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    input: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, conflicts_with_all = ["config", "arch"])]
    graph: Option<PathBuf>,
    #[arg(long, conflicts_with = "arch")]
    config: Option<PathBuf>,
    #[arg(long, requires = "params")]
    arch: Option<PathBuf>,
    #[arg(long, requires = "arch")]
    params: Option<PathBuf>,
}

/// An error with its exit code.
enum Failure {
    Config(anyhow::Error),
    Data(anyhow::Error),
    Cap(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Data(_) => 2,
            Failure::Cap(_) => 3,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Config(e) | Failure::Data(e) | Failure::Cap(e) => e,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.into())
    }
}

type Outcome = Result<(), Failure>;

fn data<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Data(e.into())
}

fn config<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Config(e.into())
}

fn mcg(e: McgError) -> Failure {
    if e.is_cap() {
        Failure::Cap(e.into())
    } else {
        Failure::Data(e.into())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Synth(a) => synth(a),
        Command::Train(a) => train_cmd(a),
        Command::Apply(a) => apply(a),
        Command::Eval(a) => eval(a),
        Command::Basis(a) => basis(a),
        Command::Trace(a) => trace(a),
        Command::Validate(a) => validate_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.code())
        }
    }
}

fn read_config_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(config)
}

fn read_data_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(data)
}

fn write_text(path: &Path, text: &str) -> Outcome {
    fs::write(path, text)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(data)
}

fn parse_loss(s: &str) -> Result<Loss, Failure> {
    match s {
        "iou" => Ok(Loss::Iou),
        "absolute" => Ok(Loss::Absolute),
        other => Err(config(anyhow!("unknown loss '{other}', expected iou or absolute"))),
    }
}

fn synth(a: SynthArgs) -> Outcome {
    let mut spec = match &a.config {
        Some(p) => parse_json::<CorpusSpec>(p, &read_config_text(p)?)?,
        None => CorpusSpec::new(10, ShapeKind::DigitsFont, 0),
    };
    if let Some(v) = a.count {
        spec.count = v;
    }
    if let Some(v) = a.width {
        spec.width = v;
    }
    if let Some(v) = a.height {
        spec.height = v;
    }
    if let Some(v) = a.noise {
        spec.noise_rate = v;
    }
    if let Some(v) = a.seed {
        spec.seed = v;
    }
    if let Some(s) = &a.shape {
        spec.shape_kind = match s.as_str() {
            "blobs" => ShapeKind::Blobs,
            "digits-font" => ShapeKind::DigitsFont,
            other => return Err(config(anyhow!("unknown shape '{other}', expected blobs or digits-font"))),
        };
    }
    spec.check().map_err(config)?;
    let m = write_corpus(&spec, &a.out).map_err(data)?;
    println!("wrote {} pairs to {}", m.files.len(), a.out.display());
    Ok(())
}

fn load_arch(path: &Path) -> Result<ArchitectureSpec, Failure> {
    let text = read_config_text(path)?;
    let value: serde_json::Value = parse_json(path, &text)?;
    let arch: ArchitectureSpec = match value.get("architecture") {
        Some(inner) => parse_json(path, &inner.to_string()).map_err(|mut e| {
            e.pointer = format!("/architecture{}", e.pointer);
            e
        })?,
        None => parse_json(path, &text)?,
    };
    arch.check()
        .with_context(|| format!("architecture in {}", path.display()))
        .map_err(config)?;
    Ok(arch)
}

fn load_model(m: &ModelArgs) -> Result<(ArchitectureSpec, ParamVector, ValidGraph), Failure> {
    let arch = load_arch(&m.arch)?;
    let params = deserialize_params(&arch, &read_data_text(&m.params)?)
        .with_context(|| format!("params file {}", m.params.display()))
        .map_err(data)?;
    let g = compile(&arch, &params).map_err(data)?.graph;
    Ok((arch, params, g))
}

fn load_corpus(dir: &Path) -> Result<Vec<SamplePair>, Failure> {
    load_pairs(dir).map_err(data)
}

fn train_cmd(a: TrainArgs) -> Outcome {
    let start = Instant::now();
    let text = read_config_text(&a.config)?;
    let mut cfg = ExperimentConfig::parse(&a.config, &text)?;
    cfg.resolve(a.config.parent().unwrap_or(Path::new(".")));
    if let Some(s) = a.seed {
        cfg.train.seed = s;
    }
    if let Some(o) = a.out {
        cfg.output_dir = Some(o);
    }
    let out = cfg
        .output_dir
        .clone()
        .ok_or_else(|| config(anyhow!("{}: no output_dir in config and no --out", a.config.display())))?;
    cfg.check_paths(&a.config)?;

    let train_pairs = load_corpus(&cfg.data.train_dir)?;
    let val_pairs = cfg.data.val_dir.as_deref().map(load_corpus).transpose()?;
    cfg.train.check(train_pairs.len()).map_err(|e| match e {
        TrainError::Config(m) if m.starts_with("batch_size") => Failure::Config(
            ConfigError {
                file: a.config.clone(),
                pointer: "/train/batch_size".into(),
                message: m,
            }
            .into(),
        ),
        other => config(other),
    })?;

    let arch = cfg.architecture.clone();
    let init = match &cfg.init.params {
        Some(p) => deserialize_params(&arch, &read_data_text(p)?)
            .with_context(|| format!("initial params {}", p.display()))
            .map_err(data)?,
        None => init_params(&arch, &mut stream_rng(cfg.train.seed, STREAM_INIT), cfg.init.perturbation),
    };

    fs::create_dir_all(&out)
        .with_context(|| format!("creating {}", out.display()))
        .map_err(data)?;
    let csv_path = out.join("metrics.csv");
    let mut csv = File::create(&csv_path)
        .map(BufWriter::new)
        .with_context(|| format!("creating {}", csv_path.display()))
        .map_err(data)?;
    writeln!(csv, "{CSV_HEADER}").and_then(|_| csv.flush()).map_err(data)?;
    let mut csv_error = None;
    let report = train(&arch, init, &train_pairs, &cfg.train, &mut |row| {
        if csv_error.is_none() {
            if let Err(e) = writeln!(csv, "{}", row.csv_row()).and_then(|_| csv.flush()) {
                csv_error = Some(e);
            }
        }
    })
    .map_err(data)?;
    if let Some(e) = csv_error {
        return Err(data(anyhow!(e).context(format!("writing {}", csv_path.display()))));
    }

    let params_text = serialize_params(&arch, &report.best_params).map_err(data)?;
    write_text(&out.join("params.json"), &params_text)?;

    let val = match &val_pairs {
        Some(v) => Some(mean_loss(&report.best_params, &arch, v, cfg.train.loss).map_err(data)?),
        None => None,
    };
    let rjson = json!({
        "train_loss": ratio_f64(&report.best_loss),
        "val_loss": val.as_ref().map(ratio_f64),
        "epochs_to_min": report.epoch_of_best,
        "train_loss_exact": report.best_loss.to_string(),
        "val_loss_exact": val.as_ref().map(|v| v.to_string()),
        "initial_loss": ratio_f64(&report.initial_loss),
        "epochs": report.log.len(),
        "moves": report.moves,
        "period_two_moves": report.period_two,
        "algorithm": cfg.train.algorithm,
        "loss": cfg.train.loss,
        "seed": cfg.train.seed,
        "train_pairs": train_pairs.len(),
        "val_pairs": val_pairs.as_ref().map(Vec::len),
    });
    write_text(&out.join("report.json"), &(serde_json::to_string_pretty(&rjson).expect("json") + "\n"))?;
    let timing = json!({ "wall_ms": start.elapsed().as_millis() as u64 });
    write_text(&out.join("timing.json"), &(serde_json::to_string_pretty(&timing).expect("json") + "\n"))?;

    println!(
        "train_loss {} val_loss {} epochs_to_min {}",
        ratio_f64(&report.best_loss),
        val.as_ref().map(|v| ratio_f64(v).to_string()).unwrap_or_else(|| "-".into()),
        report.epoch_of_best
    );
    Ok(())
}

fn apply(a: ApplyArgs) -> Outcome {
    let (_, _, g) = load_model(&a.model)?;
    let x = read_pbm(&a.input).map_err(data)?;
    write_pbm(&evaluate(&g, &x), &a.out).map_err(data)
}

fn eval(a: EvalArgs) -> Outcome {
    let loss = parse_loss(&a.loss)?;
    let (arch, params, _) = load_model(&a.model)?;
    let pairs = load_corpus(&a.data)?;
    let l = mean_loss(&params, &arch, &pairs, loss).map_err(data)?;
    let j = json!({
        "loss": ratio_f64(&l),
        "loss_exact": l.to_string(),
        "kind": loss,
        "pairs": pairs.len(),
    });
    let text = serde_json::to_string_pretty(&j).expect("json") + "\n";
    print!("{text}");
    if let Some(o) = &a.out {
        write_text(o, &text)?;
    }
    Ok(())
}

fn load_graph(path: &Path) -> Result<ValidGraph, Failure> {
    let doc = graph_from_json(&read_data_text(path)?).map_err(mcg)?;
    validate(doc.graph).map_err(|v| mcg(McgError::Invalid(v)))
}

fn basis(a: BasisArgs) -> Outcome {
    let g = match (&a.graph, &a.arch, &a.params) {
        (Some(p), _, _) => load_graph(p)?,
        (None, Some(arch), Some(params)) => {
            load_model(&ModelArgs {
                arch: arch.clone(),
                params: params.clone(),
            })?
            .2
        }
        _ => return Err(config(anyhow!("give --graph, or --arch with --params"))),
    };
    let limits = BasisLimits {
        max_window: a.max_window,
        max_intervals: a.max_intervals,
    };
    let b = basis_with_limits(&g, limits).map_err(mcg)?;
    let text = format_collection(&b);
    match &a.out {
        Some(o) => write_text(o, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn trace(a: TraceArgs) -> Outcome {
    let arch = load_arch(&a.model.arch)?;
    let params = deserialize_params(&arch, &read_data_text(&a.model.params)?)
        .with_context(|| format!("params file {}", a.model.params.display()))
        .map_err(data)?;
    let c = compile(&arch, &params).map_err(data)?;
    let x = read_pbm(&a.input).map_err(data)?;
    let all = evaluate_all(&c.graph, &x);
    fs::create_dir_all(&a.out)
        .with_context(|| format!("creating {}", a.out.display()))
        .map_err(data)?;
    for (i, (&v, spec)) in c.layer_outputs.iter().zip(&arch.layers).enumerate() {
        let path = a.out.join(format!("layer_{i:02}_{}.pbm", spec.name()));
        write_pbm(&all[v], &path).map_err(data)?;
    }
    println!("wrote {} layer images to {}", c.layer_outputs.len(), a.out.display());
    Ok(())
}

fn validate_cmd(a: ValidateArgs) -> Outcome {
    if let Some(p) = &a.graph {
        let g = load_graph(p)?;
        println!("valid graph: {} vertices, {} edges", g.graph().len(), g.graph().edges().len());
    } else if let Some(p) = &a.config {
        let mut c = ExperimentConfig::parse(p, &read_config_text(p)?)?;
        c.resolve(p.parent().unwrap_or(Path::new(".")));
        c.check_paths(p)?;
        println!("valid config: {} layers", c.architecture.layers.len());
    } else if let (Some(arch), Some(params)) = (&a.arch, &a.params) {
        let (arch, _, g) = load_model(&ModelArgs {
            arch: arch.clone(),
            params: params.clone(),
        })?;
        println!(
            "valid params: {} layers, {} vertices",
            arch.layers.len(),
            g.graph().len()
        );
    } else {
        return Err(config(anyhow!("give --graph, --config, or --arch with --params")));
    }
    Ok(())
}
