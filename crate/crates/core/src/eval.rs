//! Metrics, reference baselines and the feature-ablation runner.
//!
//! Evaluation is coarse: the three-way gold annotation collapses to literal
//! vs non-literal, with mixed readings counting as non-literal. Under that
//! mapping the all-literal baseline scores 721/908 = 79.4% on the standard
//! test split. The ablation runner retrains from scratch per configuration
//! and reports overall accuracy alongside the per-class F1 scores.

use serde::Serialize;

use crate::corpus::{Coarse, Label, Sample};
use crate::features::{build_feature_space, vectorize_corpus, FeatureConfig};
use crate::lexicons::LexiconBundle;
use crate::svm::{predict, train, SvmParams};

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("gold and prediction lengths differ: {gold} vs {pred}")]
    LengthMismatch { gold: usize, pred: usize },
    #[error("nothing to evaluate")]
    Empty,
    #[error(transparent)]
    Feature(#[from] crate::features::FeatureError),
    #[error(transparent)]
    Svm(#[from] crate::svm::SvmError),
}

/// Binary reading of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reading {
    Literal,
    NonLiteral,
}

impl Reading {
    pub fn as_str(&self) -> &'static str {
        match self {
            Reading::Literal => "literal",
            Reading::NonLiteral => "non-literal",
        }
    }
}

/// Collapse a gold label to the binary reading: metonymic and mixed are both
/// non-literal.
pub fn coarse_label(label: &Label) -> Reading {
    match label.coarse {
        Coarse::Literal => Reading::Literal,
        Coarse::Metonymic | Coarse::Mixed => Reading::NonLiteral,
    }
}

/// ±1 training target per sample: +1 non-literal, -1 literal.
pub fn svm_targets(samples: &[Sample]) -> Vec<f64> {
    samples
        .iter()
        .map(|s| match coarse_label(&s.label) {
            Reading::NonLiteral => 1.0,
            Reading::Literal => -1.0,
        })
        .collect()
}

/// 2x2 confusion counts, gold in rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Confusion {
    pub literal_as_literal: usize,
    pub literal_as_nonliteral: usize,
    pub nonliteral_as_literal: usize,
    pub nonliteral_as_nonliteral: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.literal_as_literal
            + self.literal_as_nonliteral
            + self.nonliteral_as_literal
            + self.nonliteral_as_nonliteral
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn class_metrics(tp: usize, fp: usize, fn_: usize) -> ClassMetrics {
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    ClassMetrics {
        precision,
        recall,
        f1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalReport {
    pub n: usize,
    pub accuracy: f64,
    pub literal: ClassMetrics,
    pub non_literal: ClassMetrics,
    pub confusion: Confusion,
}

/// Accuracy and per-class precision/recall/F1 from gold labels and binary
/// predictions.
pub fn evaluate(gold: &[Label], pred: &[Reading]) -> Result<EvalReport, EvalError> {
    if gold.len() != pred.len() {
        return Err(EvalError::LengthMismatch {
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    if gold.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut confusion = Confusion {
        literal_as_literal: 0,
        literal_as_nonliteral: 0,
        nonliteral_as_literal: 0,
        nonliteral_as_nonliteral: 0,
    };
    for (g, p) in gold.iter().zip(pred) {
        match (coarse_label(g), p) {
            (Reading::Literal, Reading::Literal) => confusion.literal_as_literal += 1,
            (Reading::Literal, Reading::NonLiteral) => confusion.literal_as_nonliteral += 1,
            (Reading::NonLiteral, Reading::Literal) => confusion.nonliteral_as_literal += 1,
            (Reading::NonLiteral, Reading::NonLiteral) => confusion.nonliteral_as_nonliteral += 1,
        }
    }
    let n = gold.len();
    let correct = confusion.literal_as_literal + confusion.nonliteral_as_nonliteral;
    Ok(EvalReport {
        n,
        accuracy: correct as f64 / n as f64,
        literal: class_metrics(
            confusion.literal_as_literal,
            confusion.nonliteral_as_literal,
            confusion.literal_as_nonliteral,
        ),
        non_literal: class_metrics(
            confusion.nonliteral_as_nonliteral,
            confusion.literal_as_nonliteral,
            confusion.nonliteral_as_literal,
        ),
        confusion,
    })
}

/// Predict literal for every sample.
pub fn baseline_all_literal(samples: &[Sample]) -> Vec<Reading> {
    vec![Reading::Literal; samples.len()]
}

/// Which way the subject-role baseline fires. The role is read off the first
/// GRW's relation tag (`subj`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubjectDirection {
    SubjectIsMetonymic,
    SubjectIsLiteral,
}

/// Predict from the grammatical role alone: a sample whose first GRW bears
/// the `subj` relation is read in the chosen direction, everything else the
/// opposite way.
pub fn baseline_subject(samples: &[Sample], direction: SubjectDirection) -> Vec<Reading> {
    samples
        .iter()
        .map(|s| {
            let is_subject = s.grw().relation == "subj";
            match (is_subject, direction) {
                (true, SubjectDirection::SubjectIsMetonymic) => Reading::NonLiteral,
                (false, SubjectDirection::SubjectIsMetonymic) => Reading::Literal,
                (true, SubjectDirection::SubjectIsLiteral) => Reading::Literal,
                (false, SubjectDirection::SubjectIsLiteral) => Reading::NonLiteral,
            }
        })
        .collect()
}

/// The standard seven-row feature ladder (the `table2` grid of the CLI),
/// from OH,DP,BC up to the full nine-group set.
pub fn table2_configs() -> Vec<FeatureConfig> {
    [
        "OH,DP,BC",
        "OH,DP,BC,LV",
        "OH,DP,BC,LV,PR,WN",
        "OH,DP,BC,LV,PR,WN,EM",
        "OH,DP,BC,LV,PR,WN,EM,VS",
        "OH,DP,BC,LV,PR,WN,EM,A&I",
        "OH,DP,BC,LV,PR,WN,EM,A&I,VS",
    ]
    .iter()
    .map(|s| FeatureConfig::from_flag_str(s).expect("grid flags are valid"))
    .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct AblationMetrics {
    /// Feature dimension the row trained with.
    pub k: usize,
    pub report: EvalReport,
}

/// One ablation row: a fresh feature space and a fresh training run for its
/// configuration. A failed row carries its error text instead of metrics.
#[derive(Debug, Clone, Serialize)]
pub struct AblationRow {
    pub config_id: usize,
    pub flags: String,
    #[serde(flatten)]
    pub outcome: AblationOutcome,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AblationOutcome {
    Metrics(AblationMetrics),
    Error(String),
}

fn run_one(
    train_samples: &[Sample],
    test_samples: &[Sample],
    lex: &LexiconBundle,
    cfg: FeatureConfig,
    params: &SvmParams,
) -> Result<AblationMetrics, EvalError> {
    let space = build_feature_space(train_samples, lex, cfg)?;
    let train_x = vectorize_corpus(train_samples, &space, lex);
    let train_y = svm_targets(train_samples);
    let model = train(&train_x, &train_y, params)?;

    let test_x = vectorize_corpus(test_samples, &space, lex);
    let mut predictions = Vec::with_capacity(test_x.len());
    for x in &test_x {
        let p = predict(&model, x)?;
        predictions.push(if p > 0.0 {
            Reading::NonLiteral
        } else {
            Reading::Literal
        });
    }
    let gold: Vec<Label> = test_samples.iter().map(|s| s.label).collect();
    let report = evaluate(&gold, &predictions)?;
    Ok(AblationMetrics {
        k: space.dimension(),
        report,
    })
}

/// Train and evaluate once per configuration. Rows are independent; a
/// failing row reports its error and the remaining rows still run.
pub fn run_ablation(
    train_samples: &[Sample],
    test_samples: &[Sample],
    lex: &LexiconBundle,
    configs: &[FeatureConfig],
    params: &SvmParams,
) -> Vec<AblationRow> {
    configs
        .iter()
        .enumerate()
        .map(|(idx, cfg)| {
            let outcome = match run_one(train_samples, test_samples, lex, cfg.clone(), params) {
                Ok(metrics) => AblationOutcome::Metrics(metrics),
                Err(err) => AblationOutcome::Error(err.to_string()),
            };
            AblationRow {
                config_id: idx + 1,
                flags: cfg.flag_string(),
                outcome,
            }
        })
        .collect()
}
