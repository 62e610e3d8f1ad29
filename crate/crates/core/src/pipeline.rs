//! End-to-end pipeline: label, prefix, split, encode, train, explain, mine,
//! select, shuffle, retrain, evaluate.
//!
//! Every stage derives its randomness from the run seed, so a configuration
//! plus an input log fully determines the [`RunReport`] (timings aside).

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::{optimize, ClassifierError, ForestModel, Hyperparams};
use crate::declare::{discover, Template};
use crate::encoding::{EncodedDataset, Encoding, EncodingError, EncodingKind};
use crate::eventlog::{
    apply_labeling, extract_prefixes, first_quintile_length, split_dataset, EventLog,
    EventLogError, Label, LabelRule,
};
use crate::explainer::{explain_dataset, top_items_ranked, ExplainError, RankMode};
use crate::fei::{
    build_confusion_matrix, build_pairs, mine_feis, rank_and_select, Fei, FeiError, Item,
    PairSets, Quadrant, SelectedFeis,
};
use crate::metrics::{confusion_counts, macro_f1, ClassCounts, MetricsError};
use crate::rng::{mix, stream, tags};
use crate::shuffle::{
    apply_shuffle_declare, apply_shuffle_index, plan_shuffle, retrain, ShuffleError,
    ShufflePlan, SkippedAction,
};

/// Prefix length selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PrefixChoice {
    Fixed(usize),
    /// 20th-percentile (nearest-rank) of the log's trace lengths.
    AutoQuintile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub encoding: EncodingKind,
    pub prefix: PrefixChoice,
    /// How many top explanation items feed the itemset mining.
    pub shap_top_t: usize,
    /// Top-k cut of each of the six ranked FEI lists.
    pub select_k: usize,
    /// Support threshold of the declare constraint discovery.
    pub declare_support: f64,
    /// Minimum within-quadrant support of a mined FEI.
    pub fei_min_support: f64,
    pub fei_max_size: usize,
    /// Quadrants with fewer traces than this are not mined: a handful of
    /// transactions would pass any support threshold and flood the pair
    /// sets with spurious characterizations.
    pub fei_min_quadrant: usize,
    pub hyperopt_trials: usize,
    pub seed: u64,
    /// Applied to the full log before prefixing when set; otherwise the
    /// input must already be labeled.
    pub label_rule: Option<LabelRule>,
    /// Relabels the training split (computed on complete traces).
    pub noise_rule: Option<LabelRule>,
    /// Whether the noise relabeling also touches the validation split.
    pub noise_validation: bool,
    /// Edit budget of alignment-based declare shuffling.
    pub align_budget: usize,
    /// Background rows for the explainer; 0 means the whole feedback set.
    pub shap_background: usize,
    pub rank_mode: RankMode,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            encoding: EncodingKind::Simple,
            prefix: PrefixChoice::AutoQuintile,
            shap_top_t: 10,
            select_k: 3,
            declare_support: 0.25,
            fei_min_support: 0.2,
            fei_max_size: 4,
            fei_min_quadrant: 5,
            hyperopt_trials: 50,
            seed: 1,
            label_rule: None,
            noise_rule: None,
            noise_validation: false,
            align_budget: 3,
            shap_background: 128,
            rank_mode: RankMode::Absolute,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    Label,
    Prefix,
    Split,
    Discover,
    Encode,
    Train,
    Feedback,
    Explain,
    Mine,
    Select,
    Shuffle,
    Retrain,
    Evaluate,
    Report,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Error)]
#[error("pipeline stage {stage} failed: {source}")]
pub struct PipelineError {
    pub stage: Stage,
    #[source]
    pub source: StageError,
}

#[derive(Debug, Error)]
pub enum StageError {
    #[error(transparent)]
    EventLog(#[from] EventLogError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Explain(#[from] ExplainError),
    #[error(transparent)]
    Fei(#[from] FeiError),
    #[error(transparent)]
    Shuffle(#[from] ShuffleError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("{0}")]
    Other(String),
}

fn at<E: Into<StageError>>(stage: Stage) -> impl FnOnce(E) -> PipelineError {
    move |e| PipelineError { stage, source: e.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub hyperparams: Hyperparams,
    pub validation_macro_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub traces_in: usize,
    pub traces_prefixed: usize,
    pub prefix_length: usize,
    pub n_features: usize,
    pub split_sizes: [usize; 4],
    pub positive_share: f64,
    pub discovered_constraints: usize,
}

/// Everything a run produced. `timings_ms` is informational and excluded
/// from [`RunReport::canonical_json`], which two runs with the same config
/// and log reproduce byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: PipelineConfig,
    pub dataset: DatasetSummary,
    pub baseline: ModelSummary,
    pub retrained: ModelSummary,
    pub baseline_macro_f1: f64,
    pub retrained_macro_f1: f64,
    pub feedback_confusion: BTreeMap<String, usize>,
    pub test_confusion_baseline: ClassCounts,
    pub test_confusion_retrained: ClassCounts,
    pub selected_feis: SelectedFeis,
    pub pair_sets: PairSets,
    pub shuffle_plan_train: ShufflePlan,
    pub shuffle_plan_validation: ShufflePlan,
    pub skipped_actions: Vec<SkippedAction>,
    pub timings_ms: BTreeMap<String, u64>,
}

impl RunReport {
    /// Deterministic JSON form: the full report minus timings.
    pub fn canonical_json(&self) -> String {
        let mut clone = self.clone();
        clone.timings_ms = BTreeMap::new();
        serde_json::to_string_pretty(&clone).expect("report serializes")
    }

    pub fn improvement(&self) -> f64 {
        self.retrained_macro_f1 - self.baseline_macro_f1
    }

    /// Markdown summary mirroring the baseline/re-training layout of the
    /// experiment tables.
    pub fn to_markdown(&self) -> String {
        let mut md = String::new();
        md.push_str("# Pipeline run report\n\n");
        md.push_str(&format!(
            "- encoding: {}\n- prefix length: {}\n- traces: {} ({} after prefixing)\n- seed: {}\n\n",
            self.config.encoding,
            self.dataset.prefix_length,
            self.dataset.traces_in,
            self.dataset.traces_prefixed,
            self.config.seed
        ));
        md.push_str("| Metric | Baseline | re-training |\n|---|---|---|\n");
        md.push_str(&format!(
            "| macro-F1 (test) | {:.4} | {:.4} |\n\n",
            self.baseline_macro_f1, self.retrained_macro_f1
        ));
        md.push_str("## Feedback confusion quadrants\n\n");
        md.push_str("| TP | FP | TN | FN |\n|---|---|---|---|\n");
        let q = |name: &str| self.feedback_confusion.get(name).copied().unwrap_or(0);
        md.push_str(&format!("| {} | {} | {} | {} |\n\n", q("TP"), q("FP"), q("TN"), q("FN")));

        md.push_str("## Top ranked FEIs\n\n");
        md.push_str("| List | M-score | Support | Itemset |\n|---|---|---|---|\n");
        let lists = [
            ("I+", &self.selected_feis.i_plus),
            ("I-", &self.selected_feis.i_minus),
            ("I_TP", &self.selected_feis.i_tp),
            ("I_FP", &self.selected_feis.i_fp),
            ("I_TN", &self.selected_feis.i_tn),
            ("I_FN", &self.selected_feis.i_fn),
        ];
        for (name, list) in lists {
            if list.is_empty() {
                md.push_str(&format!("| {name} | — | — | — |\n"));
            }
            for ranked in list {
                md.push_str(&format!(
                    "| {name} | {:.3} | {:.3} | {} |\n",
                    ranked.m_score, ranked.fei.support, ranked.fei
                ));
            }
        }
        md.push('\n');
        md.push_str(&format!(
            "## Shuffle\n\n- protected traces: {}\n- planned actions (train): {}\n- planned actions (validation): {}\n- skipped declare actions: {}\n",
            self.shuffle_plan_train.protected_ids.len(),
            self.shuffle_plan_train.actions.len(),
            self.shuffle_plan_validation.actions.len(),
            self.skipped_actions.len()
        ));
        md
    }
}

/// Write the JSON report and a human-readable markdown summary next to it.
pub fn emit_report(report: &RunReport, path: &std::path::Path) -> std::io::Result<()> {
    let json_path = path.with_extension("json");
    let md_path = path.with_extension("md");
    std::fs::write(&json_path, serde_json::to_string_pretty(report).map_err(std::io::Error::other)?)?;
    std::fs::write(&md_path, report.to_markdown())?;
    Ok(())
}

/// The encoded splits and bookkeeping shared by every pipeline stage.
pub struct PreparedDatasets {
    pub train: EncodedDataset,
    pub validation: EncodedDataset,
    pub feedback: EncodedDataset,
    pub test: EncodedDataset,
    pub train_log: EventLog,
    pub validation_log: EventLog,
    pub summary: DatasetSummary,
}

/// Label, prefix, split, noise-relabel and encode a log according to the
/// configuration. The feature space is fitted on training+validation.
pub fn prepare_datasets(
    config: &PipelineConfig,
    log: &EventLog,
) -> Result<PreparedDatasets, PipelineError> {
    // label on complete traces
    let labeled = match &config.label_rule {
        Some(rule) => apply_labeling(log, rule).map_err(at(Stage::Label))?,
        None => {
            if log.traces().iter().any(|t| t.label.is_none()) {
                return Err(PipelineError {
                    stage: Stage::Label,
                    source: StageError::Other(
                        "input log has unlabeled traces and no label rule was given".into(),
                    ),
                });
            }
            log.clone()
        }
    };

    // noise labels are computed on complete traces, before prefixing
    let noise_labels: Option<BTreeMap<String, Label>> = match &config.noise_rule {
        Some(rule) => {
            let relabeled = apply_labeling(&labeled, rule).map_err(at(Stage::Label))?;
            Some(
                relabeled
                    .traces()
                    .iter()
                    .map(|t| (t.case_id.clone(), t.label.unwrap()))
                    .collect(),
            )
        }
        None => None,
    };

    let prefix_length = match config.prefix {
        PrefixChoice::Fixed(n) => n,
        PrefixChoice::AutoQuintile => first_quintile_length(&labeled).ok_or(PipelineError {
            stage: Stage::Prefix,
            source: StageError::Other("cannot take the quintile of an empty log".into()),
        })?,
    };
    let prefixed = extract_prefixes(&labeled, prefix_length);

    let (mut train_log, mut validation_log, feedback_log, test_log) =
        split_dataset(&prefixed, mix(config.seed, tags::SPLIT)).map_err(at(Stage::Split))?;

    if let Some(noise) = &noise_labels {
        let relabel = |part: &mut EventLog| {
            let mut traces = part.traces().to_vec();
            for t in &mut traces {
                if let Some(l) = noise.get(&t.case_id) {
                    t.label = Some(*l);
                }
            }
            EventLog::new(traces).expect("relabeling preserves the schema")
        };
        train_log = relabel(&mut train_log);
        if config.noise_validation {
            validation_log = relabel(&mut validation_log);
        }
    }

    // fit the feature space on training+validation only
    let fit_log = EventLog::new(
        train_log
            .traces()
            .iter()
            .chain(validation_log.traces())
            .cloned()
            .collect(),
    )
    .expect("union of split parts is consistent");

    let mut discovered = 0usize;
    let encoding = match config.encoding {
        EncodingKind::Simple => {
            Encoding::fit_simple(&fit_log, prefix_length).map_err(at(Stage::Encode))?
        }
        EncodingKind::Complex => {
            Encoding::fit_complex(&fit_log, prefix_length).map_err(at(Stage::Encode))?
        }
        EncodingKind::Declare => {
            let constraints = discover(&train_log, config.declare_support, &Template::ALL);
            discovered = constraints.len();
            if constraints.is_empty() {
                return Err(PipelineError {
                    stage: Stage::Discover,
                    source: StageError::Other(format!(
                        "no declare constraints reach support {}",
                        config.declare_support
                    )),
                });
            }
            Encoding::fit_declare(&fit_log, &constraints).map_err(at(Stage::Discover))?
        }
    };

    let encode = |part: &EventLog| encoding.encode(part).map_err(at(Stage::Encode));
    let train = encode(&train_log)?;
    let validation = encode(&validation_log)?;
    let feedback = encode(&feedback_log)?;
    let test = encode(&test_log)?;

    let positive_share = prefixed
        .traces()
        .iter()
        .filter(|t| t.label == Some(Label::Positive))
        .count() as f64
        / prefixed.len().max(1) as f64;

    let summary = DatasetSummary {
        traces_in: log.len(),
        traces_prefixed: prefixed.len(),
        prefix_length,
        n_features: train.n_features(),
        split_sizes: [train.n_rows(), validation.n_rows(), feedback.n_rows(), test.n_rows()],
        positive_share,
        discovered_constraints: discovered,
    };

    Ok(PreparedDatasets { train, validation, feedback, test, train_log, validation_log, summary })
}

/// The trained models behind a report, for callers that want to persist
/// or reuse them.
pub struct PipelineArtifacts {
    pub baseline_model: ForestModel,
    pub retrained_model: ForestModel,
    pub explanations: Vec<crate::explainer::Explanation>,
}

/// Run the full explain–shuffle–retrain loop on a labeled (or labelable)
/// log and collect the [`RunReport`].
pub fn run_pipeline(config: &PipelineConfig, log: &EventLog) -> Result<RunReport, PipelineError> {
    run_pipeline_with_artifacts(config, log).map(|(report, _)| report)
}

/// As [`run_pipeline`], additionally returning the trained models and raw
/// explanations.
pub fn run_pipeline_with_artifacts(
    config: &PipelineConfig,
    log: &EventLog,
) -> Result<(RunReport, PipelineArtifacts), PipelineError> {
    let mut timings: BTreeMap<String, u64> = BTreeMap::new();
    let mut clock = Instant::now();
    let mut lap = |name: &str, clock: &mut Instant| {
        timings.insert(name.to_string(), clock.elapsed().as_millis() as u64);
        *clock = Instant::now();
    };

    let prepared = prepare_datasets(config, log)?;
    lap("prepare", &mut clock);
    let PreparedDatasets { train, validation, feedback, test, train_log, validation_log, summary } =
        prepared;

    // baseline model
    let (baseline_hp, baseline_model) =
        optimize(&train, &validation, config.hyperopt_trials, config.seed)
            .map_err(at(Stage::Train))?;
    let baseline_summary = ModelSummary {
        hyperparams: baseline_hp,
        validation_macro_f1: score(&baseline_model, &validation).map_err(at(Stage::Train))?,
    };
    lap("train_baseline", &mut clock);

    // feedback confusion matrix
    let matrix = build_confusion_matrix(&baseline_model, &feedback).map_err(at(Stage::Feedback))?;
    lap("feedback", &mut clock);

    // explanations of the feedback predictions
    let background = background_subset(&feedback, config.shap_background, config.seed);
    let explanations =
        explain_dataset(&baseline_model, &feedback, &background).map_err(at(Stage::Explain))?;
    let top_by_trace: BTreeMap<&str, BTreeSet<Item>> = explanations
        .iter()
        .map(|e| {
            let items = top_items_ranked(e, config.shap_top_t, config.rank_mode)
                .into_iter()
                .map(|item| Item { feature: item.feature, value: item.value })
                .collect();
            (e.trace_id.as_str(), items)
        })
        .collect();
    lap("explain", &mut clock);

    // per-quadrant itemset mining
    let mut feis: BTreeMap<Quadrant, Vec<Fei>> = BTreeMap::new();
    for q in Quadrant::ALL {
        let transactions: Vec<BTreeSet<Item>> = matrix
            .quadrant(q)
            .iter()
            .filter_map(|id| top_by_trace.get(id.as_str()).cloned())
            .collect();
        if transactions.len() < config.fei_min_quadrant.max(1) {
            continue; // empty or degenerate quadrants contribute nothing
        }
        let mined = mine_feis(&transactions, q, config.fei_min_support, config.fei_max_size)
            .map_err(at(Stage::Mine))?;
        feis.insert(q, mined);
    }
    lap("mine", &mut clock);

    let selected = rank_and_select(&feis, &matrix, &feedback, config.select_k);
    let pairs = build_pairs(&selected);
    lap("select", &mut clock);

    // shuffle training and validation with derived seeds
    let train_plan = plan_shuffle(&train, &pairs, mix(config.seed, tags::SHUFFLE_TRAIN))
        .map_err(at(Stage::Shuffle))?;
    let valid_plan = plan_shuffle(&validation, &pairs, mix(config.seed, tags::SHUFFLE_VALID))
        .map_err(at(Stage::Shuffle))?;
    let mut skipped_actions: Vec<SkippedAction> = Vec::new();
    let (train_shuffled, validation_shuffled) = match config.encoding {
        EncodingKind::Declare => {
            let (_, train_ds, mut skipped) =
                apply_shuffle_declare(&train_log, &train, &train_plan, config.align_budget)
                    .map_err(at(Stage::Shuffle))?;
            let (_, valid_ds, skipped_v) = apply_shuffle_declare(
                &validation_log,
                &validation,
                &valid_plan,
                config.align_budget,
            )
            .map_err(at(Stage::Shuffle))?;
            skipped.extend(skipped_v);
            skipped_actions = skipped;
            (train_ds, valid_ds)
        }
        _ => (
            apply_shuffle_index(&train, &train_plan).map_err(at(Stage::Shuffle))?,
            apply_shuffle_index(&validation, &valid_plan).map_err(at(Stage::Shuffle))?,
        ),
    };
    lap("shuffle", &mut clock);

    let (retrained_hp, retrained_model) = retrain(
        &train_shuffled,
        &validation_shuffled,
        config.hyperopt_trials,
        config.seed,
    )
    .map_err(at(Stage::Retrain))?;
    let retrained_summary = ModelSummary {
        hyperparams: retrained_hp,
        validation_macro_f1: score(&retrained_model, &validation_shuffled)
            .map_err(at(Stage::Retrain))?,
    };
    lap("retrain", &mut clock);

    // evaluation on the untouched test split
    let baseline_macro_f1 = score(&baseline_model, &test).map_err(at(Stage::Evaluate))?;
    let retrained_macro_f1 = score(&retrained_model, &test).map_err(at(Stage::Evaluate))?;
    let test_confusion_baseline =
        test_counts(&baseline_model, &test).map_err(at(Stage::Evaluate))?;
    let test_confusion_retrained =
        test_counts(&retrained_model, &test).map_err(at(Stage::Evaluate))?;
    lap("evaluate", &mut clock);

    let feedback_confusion = matrix
        .counts()
        .into_iter()
        .map(|(q, n)| (q.short().to_string(), n))
        .collect();

    let report = RunReport {
        config: config.clone(),
        dataset: summary,
        baseline: baseline_summary,
        retrained: retrained_summary,
        baseline_macro_f1,
        retrained_macro_f1,
        feedback_confusion,
        test_confusion_baseline,
        test_confusion_retrained,
        selected_feis: selected,
        pair_sets: pairs,
        shuffle_plan_train: train_plan,
        shuffle_plan_validation: valid_plan,
        skipped_actions,
        timings_ms: timings,
    };
    let artifacts =
        PipelineArtifacts { baseline_model, retrained_model, explanations };
    Ok((report, artifacts))
}

fn score(model: &ForestModel, dataset: &EncodedDataset) -> Result<f64, StageError> {
    let predicted = crate::classifier::predict_dataset(model, dataset)?;
    Ok(macro_f1(&dataset.labels, &predicted)?)
}

fn test_counts(model: &ForestModel, dataset: &EncodedDataset) -> Result<ClassCounts, StageError> {
    let predicted = crate::classifier::predict_dataset(model, dataset)?;
    Ok(confusion_counts(&dataset.labels, &predicted)?)
}

/// Deterministic background subsample for the explainer. `cap` = 0 keeps
/// the whole feedback set.
fn background_subset(feedback: &EncodedDataset, cap: usize, seed: u64) -> EncodedDataset {
    if cap == 0 || feedback.n_rows() <= cap {
        return feedback.clone();
    }
    let mut indices: Vec<usize> = (0..feedback.n_rows()).collect();
    let mut rng = stream(seed, tags::BACKGROUND);
    indices.shuffle(&mut rng);
    indices.truncate(cap);
    indices.sort_unstable();
    EncodedDataset {
        kind: feedback.kind,
        features: feedback.features.clone(),
        rows: indices.iter().map(|&i| feedback.rows[i].clone()).collect(),
        labels: indices.iter().map(|&i| feedback.labels[i]).collect(),
        trace_ids: indices.iter().map(|&i| feedback.trace_ids[i].clone()).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulation::{generate_claim_log, NoiseScenario};

    fn small_config(encoding: EncodingKind, prefix: usize, seed: u64) -> PipelineConfig {
        PipelineConfig {
            encoding,
            prefix: PrefixChoice::Fixed(prefix),
            hyperopt_trials: 3,
            seed,
            shap_background: 32,
            ..Default::default()
        }
    }

    #[test]
    fn pipeline_runs_end_to_end_on_simple_encoding() {
        let log = generate_claim_log(160, NoiseScenario::S1, 5);
        let mut config = small_config(EncodingKind::Simple, 5, 5);
        config.noise_rule = NoiseScenario::S1.noise_rule();
        let report = run_pipeline(&config, &log).unwrap();
        assert!(report.baseline_macro_f1 >= 0.0 && report.baseline_macro_f1 <= 1.0);
        assert!(report.retrained_macro_f1 >= 0.0 && report.retrained_macro_f1 <= 1.0);
        assert_eq!(report.dataset.split_sizes.iter().sum::<usize>(), report.dataset.traces_prefixed);
    }

    #[test]
    fn pipeline_is_deterministic() {
        let log = generate_claim_log(140, NoiseScenario::S2, 8);
        let mut config = small_config(EncodingKind::Complex, 6, 9);
        config.noise_rule = NoiseScenario::S2.noise_rule();
        let a = run_pipeline(&config, &log).unwrap();
        let b = run_pipeline(&config, &log).unwrap();
        assert_eq!(a.canonical_json(), b.canonical_json());
    }

    #[test]
    fn declare_pipeline_runs() {
        let log = generate_claim_log(150, NoiseScenario::S3, 4);
        let mut config = small_config(EncodingKind::Declare, 7, 4);
        config.noise_rule = NoiseScenario::S3.noise_rule();
        config.declare_support = 0.4; // keep the feature count small here
        let report = run_pipeline(&config, &log).unwrap();
        assert!(report.dataset.discovered_constraints > 0);
    }

    #[test]
    fn unlabeled_log_without_rule_fails_in_label_stage() {
        let log = {
            let traces = (0..40)
                .map(|i| crate::eventlog::Trace::from_activities(format!("t{i}"), &["a", "b"]))
                .collect();
            EventLog::new(traces).unwrap()
        };
        let err = run_pipeline(&small_config(EncodingKind::Simple, 2, 1), &log).unwrap_err();
        assert_eq!(err.stage, Stage::Label);
    }

    #[test]
    fn markdown_report_renders_empty_quadrants_with_dashes() {
        let log = generate_claim_log(120, NoiseScenario::S1, 2);
        let mut config = small_config(EncodingKind::Simple, 5, 2);
        config.noise_rule = NoiseScenario::S1.noise_rule();
        let report = run_pipeline(&config, &log).unwrap();
        let md = report.to_markdown();
        assert!(md.contains("| macro-F1 (test) |"));
        assert!(md.contains("Baseline | re-training"));
        if report.selected_feis.i_fp.is_empty() {
            assert!(md.contains("| I_FP | — | — | — |"));
        }
    }
}
