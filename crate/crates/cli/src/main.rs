//! Command-line harness for the explain–shuffle–retrain pipeline.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use retrace_core::classifier::{optimize, ForestModel};
use retrace_core::encoding::EncodingKind;
use retrace_core::eventlog::{parse_csv, parse_xes, write_csv, EventLog, LabelRule};
use retrace_core::explainer::write_jsonl;
use retrace_core::metrics::macro_f1;
use retrace_core::pipeline::{
    emit_report, prepare_datasets, run_pipeline_with_artifacts, PipelineConfig, PipelineError,
    PrefixChoice,
};
use retrace_core::simulation::{generate_claim_log, NoiseScenario};

#[derive(Parser)]
#[command(
    name = "retrace",
    version,
    about = "Outcome prediction on event logs with explanation-driven retraining"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic claim-management log as CSV.
    Generate(GenerateArgs),
    /// Encode a log and write the four dataset splits.
    Encode(StageArgs),
    /// Train the baseline classifier and save it as JSON.
    Train(StageArgs),
    /// Explain feedback predictions and mine the ranked FEIs.
    Explain(StageArgs),
    /// Shuffle the training data and save the retrained classifier.
    Retrain(StageArgs),
    /// Score a saved model (and optionally a retrained one) on the test split.
    Evaluate(EvaluateArgs),
    /// Run the whole pipeline and write the run report.
    Pipeline(StageArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of traces to simulate.
    #[arg(long, default_value_t = 4800)]
    traces: usize,
    /// Noise scenario the log is destined for: none, s1, s2 or s3.
    #[arg(long, default_value = "none")]
    noise: NoiseScenario,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output CSV path.
    #[arg(long, short, default_value = "claim_log.csv")]
    output: PathBuf,
}

#[derive(Args)]
struct ConfigArgs {
    /// key=value configuration file; command-line flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input log (.csv or .xes). Omit to simulate a synthetic log.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Synthetic log size when no --log is given.
    #[arg(long)]
    traces: Option<usize>,
    /// Noise scenario: none, s1, s2, s3. Selects the synthetic labeling
    /// and the training-split relabeling, plus encoding/prefix defaults.
    #[arg(long)]
    noise: Option<NoiseScenario>,
    /// Feature encoding: simple, complex or declare.
    #[arg(long)]
    encoding: Option<String>,
    /// Prefix length, or `auto` for the first quintile of trace lengths.
    #[arg(long)]
    prefix: Option<String>,
    /// Labeling rule evaluated on complete traces, e.g.
    /// "existence(Accept Claim)".
    #[arg(long)]
    label_rule: Option<String>,
    /// Training-split relabeling rule (overrides the scenario's).
    #[arg(long)]
    noise_rule: Option<String>,
    /// Also apply the noise relabeling to the validation split.
    #[arg(long)]
    noise_validation: bool,
    /// Explanation items kept per trace.
    #[arg(long)]
    shap_top_t: Option<usize>,
    /// Top-k cut of the six ranked FEI lists.
    #[arg(long)]
    select_k: Option<usize>,
    #[arg(long)]
    declare_support: Option<f64>,
    #[arg(long)]
    fei_min_support: Option<f64>,
    /// Hyperparameter search trials.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    align_budget: Option<usize>,
    /// Background rows for the explainer (0 = whole feedback set).
    #[arg(long)]
    shap_background: Option<usize>,
}

#[derive(Args)]
struct StageArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Output directory for this stage's artifacts.
    #[arg(long, short, default_value = "runs")]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Baseline model JSON to score.
    #[arg(long)]
    model: PathBuf,
    /// Optional retrained model for a side-by-side comparison.
    #[arg(long)]
    retrained_model: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Encode(args) => cmd_encode(args),
        Command::Train(args) => cmd_train(args),
        Command::Explain(args) => cmd_explain(args),
        Command::Retrain(args) => cmd_retrain(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Pipeline(args) => cmd_pipeline(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            // stage failures and bad inputs both exit 2
            ExitCode::from(2)
        }
    }
}

/// Resolve defaults ← config file ← command-line flags into a pipeline
/// configuration plus the input log.
fn resolve(args: &ConfigArgs) -> Result<(PipelineConfig, EventLog)> {
    let mut file_values: BTreeMap<String, String> = BTreeMap::new();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        for (line_no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("{}:{}: expected key=value", path.display(), line_no + 1))?;
            file_values.insert(key.trim().to_string(), value.trim().to_string());
        }
    }
    let from_file = |key: &str| file_values.get(key).cloned();

    let noise: Option<NoiseScenario> = match &args.noise {
        Some(n) => Some(*n),
        None => from_file("noise").map(|v| v.parse()).transpose().map_err(|e| anyhow!("{e}"))?,
    };

    let mut config = PipelineConfig::default();
    if let Some(scenario) = noise {
        config.encoding = scenario.default_encoding();
        config.prefix = PrefixChoice::Fixed(scenario.default_prefix());
        config.label_rule = Some(scenario.condition_rule());
        config.noise_rule = scenario.noise_rule();
    }

    let encoding_text = args.encoding.clone().or_else(|| from_file("encoding"));
    if let Some(text) = encoding_text {
        config.encoding = match text.to_ascii_lowercase().as_str() {
            "simple" | "simple-index" => EncodingKind::Simple,
            "complex" | "complex-index" => EncodingKind::Complex,
            "declare" => EncodingKind::Declare,
            other => bail!("unknown encoding `{other}` (use simple|complex|declare)"),
        };
    }
    let prefix_text = args.prefix.clone().or_else(|| from_file("prefix"));
    if let Some(text) = prefix_text {
        config.prefix = if text.eq_ignore_ascii_case("auto") {
            PrefixChoice::AutoQuintile
        } else {
            PrefixChoice::Fixed(text.parse().context("--prefix takes an integer or `auto`")?)
        };
    }
    if let Some(rule) = args.label_rule.clone().or_else(|| from_file("label-rule")) {
        config.label_rule = Some(rule.parse::<LabelRule>().map_err(|e| anyhow!("{e}"))?);
    }
    if let Some(rule) = args.noise_rule.clone().or_else(|| from_file("noise-rule")) {
        config.noise_rule = Some(rule.parse::<LabelRule>().map_err(|e| anyhow!("{e}"))?);
    }

    macro_rules! take {
        ($field:ident, $key:literal) => {
            if let Some(v) = args.$field {
                config.$field = v;
            } else if let Some(text) = from_file($key) {
                config.$field = text.parse().with_context(|| format!("config key {}", $key))?;
            }
        };
    }
    take!(shap_top_t, "shap-top-t");
    take!(select_k, "select-k");
    take!(declare_support, "declare-support");
    take!(fei_min_support, "fei-min-support");
    take!(seed, "seed");
    take!(align_budget, "align-budget");
    take!(shap_background, "shap-background");
    if let Some(v) = args.trials {
        config.hyperopt_trials = v;
    } else if let Some(text) = from_file("trials") {
        config.hyperopt_trials = text.parse().context("config key trials")?;
    }
    if args.noise_validation || from_file("noise-validation").as_deref() == Some("true") {
        config.noise_validation = true;
    }

    let log_path = args.log.clone().or_else(|| from_file("log").map(PathBuf::from));
    let log = match log_path {
        Some(path) => load_log(&path)?,
        None => {
            let n = args
                .traces
                .or_else(|| from_file("traces").and_then(|t| t.parse().ok()))
                .unwrap_or(4800);
            let scenario = noise.unwrap_or(NoiseScenario::None);
            generate_claim_log(n, scenario, config.seed)
        }
    };
    Ok((config, log))
}

fn load_log(path: &Path) -> Result<EventLog> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let reader = BufReader::new(file);
    let log = match path.extension().and_then(|e| e.to_str()) {
        Some("xes") => parse_xes(reader)?,
        _ => parse_csv(reader, None)?,
    };
    Ok(log)
}

fn stage_err(err: PipelineError) -> anyhow::Error {
    anyhow!("{err}")
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let log = generate_claim_log(args.traces, args.noise, args.seed);
    let file = File::create(&args.output)
        .with_context(|| format!("creating {}", args.output.display()))?;
    write_csv(&log, BufWriter::new(file))?;
    println!(
        "wrote {} traces ({} noise scenario) to {}",
        log.len(),
        args.noise,
        args.output.display()
    );
    Ok(())
}

fn cmd_encode(args: StageArgs) -> Result<()> {
    let (config, log) = resolve(&args.config)?;
    let prepared = prepare_datasets(&config, &log).map_err(stage_err)?;
    std::fs::create_dir_all(&args.out)?;
    for (name, ds) in [
        ("train", &prepared.train),
        ("validation", &prepared.validation),
        ("feedback", &prepared.feedback),
        ("test", &prepared.test),
    ] {
        let csv_path = args.out.join(format!("{name}.csv"));
        ds.write_csv(BufWriter::new(File::create(&csv_path)?))?;
        let bin_path = args.out.join(format!("{name}.bin"));
        ds.write_binary(BufWriter::new(File::create(&bin_path)?))?;
    }
    println!(
        "encoded {} features over splits {:?} into {}",
        prepared.summary.n_features,
        prepared.summary.split_sizes,
        args.out.display()
    );
    Ok(())
}

fn cmd_train(args: StageArgs) -> Result<()> {
    let (config, log) = resolve(&args.config)?;
    let prepared = prepare_datasets(&config, &log).map_err(stage_err)?;
    let (hp, model) =
        optimize(&prepared.train, &prepared.validation, config.hyperopt_trials, config.seed)?;
    std::fs::create_dir_all(&args.out)?;
    let model_path = args.out.join("model.json");
    model.save_json(BufWriter::new(File::create(&model_path)?))?;
    let predicted = retrace_core::classifier::predict_dataset(&model, &prepared.validation)?;
    let validation_f1 = macro_f1(&prepared.validation.labels, &predicted)?;
    println!(
        "trained {:?} (validation macro-F1 {validation_f1:.4}), saved to {}",
        hp,
        model_path.display()
    );
    Ok(())
}

fn cmd_explain(args: StageArgs) -> Result<()> {
    let (config, log) = resolve(&args.config)?;
    let (report, artifacts) = run_pipeline_with_artifacts(&config, &log).map_err(stage_err)?;
    std::fs::create_dir_all(&args.out)?;

    let jsonl = args.out.join("explanations.jsonl");
    write_jsonl(&artifacts.explanations, BufWriter::new(File::create(&jsonl)?))?;
    let feis = args.out.join("feis.json");
    serde_json::to_writer_pretty(
        BufWriter::new(File::create(&feis)?),
        &(&report.selected_feis, &report.pair_sets),
    )?;
    println!(
        "explained {} feedback traces; ranked FEIs and pair sets in {}",
        artifacts.explanations.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_retrain(args: StageArgs) -> Result<()> {
    let (config, log) = resolve(&args.config)?;
    let (report, artifacts) = run_pipeline_with_artifacts(&config, &log).map_err(stage_err)?;
    std::fs::create_dir_all(&args.out)?;
    artifacts
        .baseline_model
        .save_json(BufWriter::new(File::create(args.out.join("model.json"))?))?;
    artifacts
        .retrained_model
        .save_json(BufWriter::new(File::create(args.out.join("model_retrained.json"))?))?;
    serde_json::to_writer_pretty(
        BufWriter::new(File::create(args.out.join("shuffle_plan.json"))?),
        &(&report.shuffle_plan_train, &report.shuffle_plan_validation, &report.skipped_actions),
    )?;
    println!(
        "baseline macro-F1 {:.4} -> retrained {:.4}; models and shuffle audit in {}",
        report.baseline_macro_f1,
        report.retrained_macro_f1,
        args.out.display()
    );
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    let (config, log) = resolve(&args.config)?;
    let prepared = prepare_datasets(&config, &log).map_err(stage_err)?;
    let model = ForestModel::load_json(BufReader::new(File::open(&args.model)?))?;
    let predicted = retrace_core::classifier::predict_dataset(&model, &prepared.test)?;
    let baseline = macro_f1(&prepared.test.labels, &predicted)?;
    println!("baseline test macro-F1: {baseline:.4}");
    if let Some(path) = &args.retrained_model {
        let retrained = ForestModel::load_json(BufReader::new(File::open(path)?))?;
        let predicted = retrace_core::classifier::predict_dataset(&retrained, &prepared.test)?;
        let score = macro_f1(&prepared.test.labels, &predicted)?;
        println!("retrained test macro-F1: {score:.4}");
    }
    Ok(())
}

fn cmd_pipeline(args: StageArgs) -> Result<()> {
    let (config, log) = resolve(&args.config)?;
    let (report, _) = run_pipeline_with_artifacts(&config, &log).map_err(stage_err)?;
    std::fs::create_dir_all(&args.out)?;
    let base = args.out.join("report");
    emit_report(&report, &base)?;
    let mut stdout = std::io::stdout().lock();
    writeln!(
        stdout,
        "baseline macro-F1 {:.4} -> retrained {:.4} (improvement {:+.4})",
        report.baseline_macro_f1,
        report.retrained_macro_f1,
        report.improvement()
    )?;
    writeln!(stdout, "report written to {}.json / {}.md", base.display(), base.display())?;
    Ok(())
}
