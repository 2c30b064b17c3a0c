//! Command-line surface for the metonym toolkit: train a classifier,
//! predict, evaluate against gold labels or the reference baselines, run
//! feature ablations, compute selectional-preference verb ratios and check
//! lexicon coverage.

mod bundle;
mod manifest;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use metonym_core::corpus::{self, Sample};
use metonym_core::eval::{
    self, baseline_all_literal, baseline_subject, table2_configs, AblationOutcome, EvalReport,
    Reading, SubjectDirection,
};
use metonym_core::features::{build_feature_space, vectorize_corpus, FeatureConfig, FeatureSpace};
use metonym_core::lexicons::grw_coverage;
use metonym_core::selpref;
use metonym_core::svm::{self, ClassWeight, GammaSpec, KernelKind, SvmParams};

use bundle::{load_bundle, LoadedBundle};
use manifest::{display_path, RunManifest};

#[derive(Parser)]
#[command(
    name = "metonym",
    version,
    about = "Literal vs metonymic classification of location words"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train an SVM on an annotated JSONL corpus
    Train(TrainArgs),
    /// Predict readings for a JSONL corpus with a trained model
    Predict(PredictArgs),
    /// Evaluate a model or a reference baseline against gold labels
    Eval(EvalArgs),
    /// Train and evaluate one row per feature combination
    Ablate(AblateArgs),
    /// Person/location selectional-preference ratios for verbs
    Selpref(SelprefArgs),
    /// Fraction of GRWs covered by each lexicon resource
    Lexcheck(LexcheckArgs),
}

#[derive(Args)]
struct FeatureArgs {
    /// Comma-separated feature groups: OH,DP,BC,LV,PR,WN,EM,VS,A&I
    #[arg(long, default_value = "OH,DP,BC,LV,PR,WN,EM,A&I,VS")]
    features: String,
    /// Brown cluster path prefix length
    #[arg(long = "brown-prefix", default_value_t = 4)]
    brown_prefix: usize,
    /// Fill only the abstractness slot of the A&I block
    #[arg(long = "ai-abstractness-only")]
    ai_abstractness_only: bool,
    /// Value for a covered word's missing abstractness/imaginability degree
    #[arg(long = "ai-missing-value", default_value_t = 0.0)]
    ai_missing_value: f64,
    /// L2-normalize each feature vector
    #[arg(long)]
    normalize: bool,
    /// Word list whose members raise an extra GRW indicator feature
    #[arg(long = "selpref-verbs")]
    selpref_verbs: Option<PathBuf>,
}

impl FeatureArgs {
    fn to_config(&self) -> anyhow::Result<FeatureConfig> {
        let mut cfg = FeatureConfig::from_flag_str(&self.features)?;
        cfg.brown_prefix_len = self.brown_prefix;
        cfg.ai_use_imaginability = !self.ai_abstractness_only;
        cfg.ai_missing_value = self.ai_missing_value;
        cfg.normalize = self.normalize;
        if let Some(path) = &self.selpref_verbs {
            let reader = open(path)?;
            let list = metonym_core::lexicons::load_wordlist(reader)
                .with_context(|| format!("loading {}", path.display()))?;
            cfg.selpref_verbs = Some(list.iter().map(str::to_string).collect());
        }
        Ok(cfg)
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum KernelArg {
    Rbf,
    Linear,
}

#[derive(Args)]
struct SvmArgs {
    /// Soft-margin penalty
    #[arg(long = "C", default_value_t = 1.0)]
    c: f64,
    #[arg(long, value_enum, default_value = "rbf")]
    kernel: KernelArg,
    /// RBF bandwidth, or "auto" for 1/k
    #[arg(long, default_value = "auto")]
    gamma: String,
    /// KKT tolerance
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    /// Seed for the solver's randomized pair fallback
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// none | balanced | <pos>:<neg> penalty multipliers
    #[arg(long = "class-weight", default_value = "none")]
    class_weight: String,
}

impl SvmArgs {
    fn to_params(&self) -> anyhow::Result<SvmParams> {
        let gamma = if self.gamma == "auto" {
            GammaSpec::Auto
        } else {
            let g: f64 = self
                .gamma
                .parse()
                .with_context(|| format!("bad --gamma {:?}", self.gamma))?;
            GammaSpec::Fixed(g)
        };
        let class_weight = match self.class_weight.as_str() {
            "none" => None,
            "balanced" => Some(ClassWeight::Balanced),
            pair => {
                let (pos, neg) = pair.split_once(':').with_context(|| {
                    format!("bad --class-weight {pair:?}, expected none|balanced|pos:neg")
                })?;
                Some(ClassWeight::Custom {
                    positive: pos
                        .parse()
                        .with_context(|| format!("bad positive weight {pos:?}"))?,
                    negative: neg
                        .parse()
                        .with_context(|| format!("bad negative weight {neg:?}"))?,
                })
            }
        };
        Ok(SvmParams {
            c: self.c,
            kernel: match self.kernel {
                KernelArg::Rbf => KernelKind::Rbf,
                KernelArg::Linear => KernelKind::Linear,
            },
            gamma,
            tol: self.tol,
            seed: self.seed,
            class_weight,
            ..SvmParams::default()
        })
    }
}

#[derive(Args)]
struct TrainArgs {
    /// Training corpus (JSONL)
    #[arg(long)]
    corpus: PathBuf,
    /// Directory of lexicon resources
    #[arg(long = "lex-dir")]
    lex_dir: Option<PathBuf>,
    #[command(flatten)]
    features: FeatureArgs,
    #[command(flatten)]
    svm: SvmArgs,
    /// Model output path; the feature space and manifest land next to it
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// Feature space file (default: <model>.space.json sibling)
    #[arg(long)]
    space: Option<PathBuf>,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long = "lex-dir")]
    lex_dir: Option<PathBuf>,
    /// Output JSONL (default stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum BaselineArg {
    AllLiteral,
    Subject,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum DirectionArg {
    SubjectIsMetonymic,
    SubjectIsLiteral,
}

#[derive(Args)]
struct EvalArgs {
    /// Corpus with gold labels (JSONL)
    #[arg(long)]
    corpus: PathBuf,
    /// Trained model to evaluate
    #[arg(long, conflicts_with = "baseline")]
    model: Option<PathBuf>,
    #[arg(long)]
    space: Option<PathBuf>,
    #[arg(long = "lex-dir")]
    lex_dir: Option<PathBuf>,
    /// Evaluate a reference baseline instead of a model
    #[arg(long, value_enum)]
    baseline: Option<BaselineArg>,
    /// Reading assigned to subject-role samples by the subject baseline
    #[arg(long, value_enum, default_value = "subject-is-metonymic")]
    direction: DirectionArg,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AblateArgs {
    /// Training corpus (JSONL)
    #[arg(long)]
    corpus: PathBuf,
    /// Held-out corpus (JSONL)
    #[arg(long)]
    test: PathBuf,
    #[arg(long = "lex-dir")]
    lex_dir: Option<PathBuf>,
    /// Configuration grid: the seven-row standard ladder
    #[arg(long, default_value = "table2", conflicts_with = "configs")]
    grid: String,
    /// Semicolon-separated explicit flag lists, e.g. "OH,DP;OH,DP,BC"
    #[arg(long)]
    configs: Option<String>,
    #[arg(long = "brown-prefix", default_value_t = 4)]
    brown_prefix: usize,
    #[arg(long = "ai-abstractness-only")]
    ai_abstractness_only: bool,
    #[arg(long = "ai-missing-value", default_value_t = 0.0)]
    ai_missing_value: f64,
    #[arg(long)]
    normalize: bool,
    #[command(flatten)]
    svm: SvmArgs,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SelprefArgs {
    /// Verb subject-count file
    #[arg(long)]
    counts: PathBuf,
    /// Selection threshold on the person/location ratio (> 1)
    #[arg(long)]
    threshold: f64,
    /// Ratio table output (default stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the selected verbs, one per line
    #[arg(long = "select-out")]
    select_out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct LexcheckArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long = "lex-dir")]
    lex_dir: PathBuf,
    #[arg(long)]
    json: bool,
}

fn open(path: &Path) -> anyhow::Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("opening {}", path.display()))?,
    ))
}

fn read_corpus(path: &Path) -> anyhow::Result<Vec<Sample>> {
    corpus::parse_corpus(open(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn space_path_for(model: &Path) -> PathBuf {
    let mut name = model
        .file_stem()
        .map(|s| s.to_os_string())
        .unwrap_or_default();
    name.push(".space.json");
    model.with_file_name(name)
}

/// Writer to `--out` or stdout.
fn out_writer(out: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn predictions_to_readings(
    model: &svm::SvmModel,
    xs: &[metonym_core::features::SparseVector],
) -> anyhow::Result<Vec<(Reading, f64)>> {
    xs.iter()
        .map(|x| {
            let value = svm::decision(model, x)?;
            let reading = if value > 0.0 {
                Reading::NonLiteral
            } else {
                Reading::Literal
            };
            Ok((reading, value))
        })
        .collect()
}

fn format_report(report: &EvalReport) -> String {
    let mut s = String::new();
    s.push_str(&format!("samples           {}\n", report.n));
    s.push_str(&format!("accuracy          {:.4}\n", report.accuracy));
    s.push_str("class             precision  recall     f1\n");
    s.push_str(&format!(
        "literal           {:.4}     {:.4}     {:.4}\n",
        report.literal.precision, report.literal.recall, report.literal.f1
    ));
    s.push_str(&format!(
        "non-literal       {:.4}     {:.4}     {:.4}\n",
        report.non_literal.precision, report.non_literal.recall, report.non_literal.f1
    ));
    s.push_str("confusion         pred-literal  pred-nonliteral\n");
    s.push_str(&format!(
        "gold literal      {:<13} {}\n",
        report.confusion.literal_as_literal, report.confusion.literal_as_nonliteral
    ));
    s.push_str(&format!(
        "gold non-literal  {:<13} {}\n",
        report.confusion.nonliteral_as_literal, report.confusion.nonliteral_as_nonliteral
    ));
    s
}

fn cmd_train(args: &TrainArgs) -> anyhow::Result<()> {
    let samples = read_corpus(&args.corpus)?;
    let LoadedBundle { bundle, paths } = load_bundle(args.lex_dir.as_deref())?;
    let cfg = args.features.to_config()?;
    let params = args.svm.to_params()?;

    let space = build_feature_space(&samples, &bundle, cfg.clone())?;
    let xs = vectorize_corpus(&samples, &space, &bundle);
    let ys = eval::svm_targets(&samples);
    let model = svm::train(&xs, &ys, &params)?;

    let space_path = space_path_for(&args.out);
    svm::save_model(
        &model,
        File::create(&args.out).with_context(|| format!("creating {}", args.out.display()))?,
    )?;
    space.save(
        File::create(&space_path).with_context(|| format!("creating {}", space_path.display()))?,
    )?;

    let mut manifest = RunManifest::new("train");
    manifest.corpus = Some(display_path(&args.corpus));
    manifest.lexicons = paths;
    manifest.features = Some(cfg);
    manifest.svm = Some(params);
    manifest.seed = Some(args.svm.seed);
    manifest.output("model", &args.out);
    manifest.output("space", &space_path);
    let manifest_path = manifest.write_next_to(&args.out)?;

    println!(
        "trained on {} samples: k={}, support vectors={}, bias={:.6}",
        samples.len(),
        space.dimension(),
        model.support_vectors.len(),
        model.bias
    );
    println!(
        "wrote {}, {}, {}",
        args.out.display(),
        space_path.display(),
        manifest_path.display()
    );
    Ok(())
}

fn cmd_predict(args: &PredictArgs) -> anyhow::Result<()> {
    let samples = read_corpus(&args.corpus)?;
    let LoadedBundle { bundle, paths } = load_bundle(args.lex_dir.as_deref())?;
    let model = svm::load_model(open(&args.model)?)
        .with_context(|| format!("loading model {}", args.model.display()))?;
    let space_path = args
        .space
        .clone()
        .unwrap_or_else(|| space_path_for(&args.model));
    let space = FeatureSpace::load(open(&space_path)?)
        .with_context(|| format!("loading feature space {}", space_path.display()))?;

    let xs = vectorize_corpus(&samples, &space, &bundle);
    let predictions = predictions_to_readings(&model, &xs)?;

    let mut writer = out_writer(args.out.as_deref())?;
    for (sample, (reading, value)) in samples.iter().zip(&predictions) {
        let line = serde_json::json!({
            "id": sample.id,
            "prediction": reading.as_str(),
            "decision": value,
        });
        writeln!(writer, "{line}")?;
    }
    writer.flush()?;

    if let Some(out) = &args.out {
        let mut manifest = RunManifest::new("predict");
        manifest.corpus = Some(display_path(&args.corpus));
        manifest.lexicons = paths;
        manifest.output("model", &args.model);
        manifest.output("space", &space_path);
        manifest.output("predictions", out);
        manifest.write_next_to(out)?;
    }
    Ok(())
}

fn cmd_eval(args: &EvalArgs) -> anyhow::Result<()> {
    let samples = read_corpus(&args.corpus)?;
    let gold: Vec<_> = samples.iter().map(|s| s.label).collect();

    let mut manifest = RunManifest::new("eval");
    manifest.corpus = Some(display_path(&args.corpus));

    let predictions: Vec<Reading> = match (&args.model, args.baseline) {
        (Some(model_path), None) => {
            let LoadedBundle { bundle, paths } = load_bundle(args.lex_dir.as_deref())?;
            let model = svm::load_model(open(model_path)?)
                .with_context(|| format!("loading model {}", model_path.display()))?;
            let space_path = args
                .space
                .clone()
                .unwrap_or_else(|| space_path_for(model_path));
            let space = FeatureSpace::load(open(&space_path)?)
                .with_context(|| format!("loading feature space {}", space_path.display()))?;
            manifest.lexicons = paths;
            manifest.output("model", model_path);
            manifest.svm = Some(model.params.clone());
            let xs = vectorize_corpus(&samples, &space, &bundle);
            predictions_to_readings(&model, &xs)?
                .into_iter()
                .map(|(r, _)| r)
                .collect()
        }
        (None, Some(BaselineArg::AllLiteral)) => {
            manifest.baseline = Some("all-literal".into());
            baseline_all_literal(&samples)
        }
        (None, Some(BaselineArg::Subject)) => {
            let direction = match args.direction {
                DirectionArg::SubjectIsMetonymic => SubjectDirection::SubjectIsMetonymic,
                DirectionArg::SubjectIsLiteral => SubjectDirection::SubjectIsLiteral,
            };
            manifest.baseline = Some(format!(
                "subject:{}",
                match direction {
                    SubjectDirection::SubjectIsMetonymic => "subject-is-metonymic",
                    SubjectDirection::SubjectIsLiteral => "subject-is-literal",
                }
            ));
            baseline_subject(&samples, direction)
        }
        (None, None) => bail!("one of --model or --baseline is required"),
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    };

    let report = eval::evaluate(&gold, &predictions)?;
    let mut writer = out_writer(args.out.as_deref())?;
    if args.json {
        serde_json::to_writer_pretty(&mut writer, &report)?;
        writeln!(writer)?;
    } else {
        write!(writer, "{}", format_report(&report))?;
    }
    writer.flush()?;

    if let Some(out) = &args.out {
        manifest.output("report", out);
        manifest.write_next_to(out)?;
    }
    Ok(())
}

fn cmd_ablate(args: &AblateArgs) -> anyhow::Result<()> {
    let train_samples = read_corpus(&args.corpus)?;
    let test_samples = read_corpus(&args.test)?;
    let LoadedBundle { bundle, paths } = load_bundle(args.lex_dir.as_deref())?;
    let params = args.svm.to_params()?;

    let apply_opts = |mut cfg: FeatureConfig| {
        cfg.brown_prefix_len = args.brown_prefix;
        cfg.ai_use_imaginability = !args.ai_abstractness_only;
        cfg.ai_missing_value = args.ai_missing_value;
        cfg.normalize = args.normalize;
        cfg
    };
    let configs: Vec<FeatureConfig> = match &args.configs {
        Some(lists) => lists
            .split(';')
            .filter(|s| !s.trim().is_empty())
            .map(|flags| FeatureConfig::from_flag_str(flags).map(apply_opts))
            .collect::<Result<_, _>>()?,
        None => {
            if args.grid != "table2" {
                bail!("unknown grid {:?}, expected \"table2\"", args.grid);
            }
            table2_configs().into_iter().map(apply_opts).collect()
        }
    };

    let rows = eval::run_ablation(&train_samples, &test_samples, &bundle, &configs, &params);

    let mut writer = out_writer(args.out.as_deref())?;
    if args.json {
        serde_json::to_writer_pretty(&mut writer, &rows)?;
        writeln!(writer)?;
    } else {
        let width = rows.iter().map(|r| r.flags.len()).max().unwrap_or(8).max(8);
        writeln!(
            writer,
            "{:<3} {:<width$}  {:>6}  {:>8}  {:>8}  {:>8}",
            "#", "features", "k", "acc", "f1-lit", "f1-non"
        )?;
        for row in &rows {
            match &row.outcome {
                AblationOutcome::Metrics(m) => writeln!(
                    writer,
                    "{:<3} {:<width$}  {:>6}  {:>8.4}  {:>8.4}  {:>8.4}",
                    row.config_id,
                    row.flags,
                    m.k,
                    m.report.accuracy,
                    m.report.literal.f1,
                    m.report.non_literal.f1
                )?,
                AblationOutcome::Error(e) => writeln!(
                    writer,
                    "{:<3} {:<width$}  ERROR: {e}",
                    row.config_id, row.flags
                )?,
            }
        }
    }
    writer.flush()?;

    if let Some(out) = &args.out {
        let mut manifest = RunManifest::new("ablate");
        manifest.corpus = Some(display_path(&args.corpus));
        manifest.test = Some(display_path(&args.test));
        manifest.lexicons = paths;
        manifest.svm = Some(params);
        manifest.seed = Some(args.svm.seed);
        manifest.output("table", out);
        manifest.write_next_to(out)?;
    }
    Ok(())
}

fn cmd_selpref(args: &SelprefArgs) -> anyhow::Result<()> {
    if !args.threshold.is_finite() || args.threshold <= 1.0 {
        bail!("--threshold must be greater than 1, got {}", args.threshold);
    }
    let counts = selpref::parse_counts(open(&args.counts)?)
        .with_context(|| format!("parsing {}", args.counts.display()))?;
    let rows = selpref::verb_ratios(&counts)?;
    let selected = selpref::select_restricted(&rows, args.threshold);

    let mut writer = out_writer(args.out.as_deref())?;
    if args.json {
        let payload =
            serde_json::json!({ "rows": rows, "threshold": args.threshold, "selected": selected });
        serde_json::to_writer_pretty(&mut writer, &payload)?;
        writeln!(writer)?;
    } else {
        selpref::write_ratios(&rows, &mut writer)?;
    }
    writer.flush()?;

    if let Some(path) = &args.select_out {
        let mut file = BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        );
        for verb in &selected {
            writeln!(file, "{verb}")?;
        }
        file.flush()?;
    } else {
        eprintln!(
            "{} of {} verbs at ratio >= {}",
            selected.len(),
            rows.len(),
            args.threshold
        );
    }

    if let Some(out) = &args.out {
        let mut manifest = RunManifest::new("selpref");
        manifest.corpus = Some(display_path(&args.counts));
        manifest.threshold = Some(args.threshold);
        manifest.output("table", out);
        if let Some(sel) = &args.select_out {
            manifest.output("selected", sel);
        }
        manifest.write_next_to(out)?;
    }
    Ok(())
}

fn cmd_lexcheck(args: &LexcheckArgs) -> anyhow::Result<()> {
    let samples = read_corpus(&args.corpus)?;
    let LoadedBundle { bundle, paths } = load_bundle(Some(&args.lex_dir))?;
    let report = grw_coverage(&samples, &bundle);

    let mut writer = out_writer(None)?;
    if args.json {
        let payload = serde_json::json!({ "coverage": report, "files": paths });
        serde_json::to_writer_pretty(&mut writer, &payload)?;
        writeln!(writer)?;
    } else {
        writeln!(writer, "samples: {}", report.n_samples)?;
        writeln!(
            writer,
            "{:<14} {:>6}  {:>8}  file",
            "resource", "hits", "covered"
        )?;
        for (name, (hits, frac)) in &report.resources {
            let file = paths.get(*name).map(String::as_str).unwrap_or("-");
            writeln!(
                writer,
                "{name:<14} {hits:>6}  {:>7.1}%  {file}",
                frac * 100.0
            )?;
        }
    }
    writer.flush()?;
    Ok(())
}

fn main() -> std::process::ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Train(args) => cmd_train(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Ablate(args) => cmd_ablate(args),
        Command::Selpref(args) => cmd_selpref(args),
        Command::Lexcheck(args) => cmd_lexcheck(args),
    };
    match result {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(err) => {
            // a closed stdout (e.g. piping into head) is not a failure
            if let Some(io) = err.downcast_ref::<std::io::Error>() {
                if io.kind() == std::io::ErrorKind::BrokenPipe {
                    return std::process::ExitCode::SUCCESS;
                }
            }
            eprintln!("error: {err:#}");
            std::process::ExitCode::FAILURE
        }
    }
}
