//! `tabmia`: reproducible pipelines for auditing membership leakage of
//! tabular diffusion synthesizers.

mod errors;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use tabmia_core::attack::{
    extract_features, model_based_split, read_classifier, read_feature_matrix, score_records,
    train_attack_classifier, write_classifier, write_feature_matrix, write_scores_csv,
    FeatureMatrix, NoiseSet, TimeSet,
};
use tabmia_core::challenge::{
    challenge_csv_path, checkpoint_path, prepare_experiment_data, read_challenge_csv,
    run_challenge, synthesize_dump, train_target, ExperimentHandle,
};
use tabmia_core::config::{config_hash, derive_seed, RunConfig};
use tabmia_core::diffusion::build_schedule;
use tabmia_core::evaluation::{auc, compute_roc, emit_report, tpr_at_fpr, MetricReport};
use tabmia_core::tabular::encode;

use errors::{CliError, Result};

const EXIT_CODE_HELP: &str = "EXIT CODES:\n  \
    0  success\n  \
    2  configuration error (bad JSON, invalid values, bad flags)\n  \
    3  missing input file or artifact\n  \
    4  data or schema violation\n  \
    5  numeric failure (divergence, non-finite values)\n  \
    6  internal error\n\n\
On failure a machine-readable JSON object is printed to stderr:\n  \
    {\"error\":{\"code\":N,\"kind\":\"...\",\"message\":\"...\"}}\n\n\
ENVIRONMENT:\n  \
    TABMIA_LOG  log filter (error, warn, info, debug, trace)";

#[derive(Parser)]
#[command(
    name = "tabmia",
    version,
    about = "Membership-inference audits for tabular diffusion synthesizers",
    after_help = EXIT_CODE_HELP
)]
struct Cli {
    /// Override the config file's master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for fleet training and feature extraction.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the population and every per-model challenge/ground-truth file.
    GenData {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one target model on its member rows.
    TrainTarget {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        model_id: u32,
    },
    /// Sample a synthetic dump from a trained target.
    Synth {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        model_id: u32,
        /// Rows to sample (default: one per member row).
        #[arg(long)]
        count: Option<usize>,
    },
    /// Compute the loss-feature grid for one model's query rows.
    ExtractFeatures {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        model_id: u32,
        /// Query CSV (defaults to the model's challenge.csv).
        #[arg(long)]
        records: Option<PathBuf>,
        /// Output feature file (defaults to models/m<id>/features.bin).
        #[arg(long)]
        features_out: Option<PathBuf>,
    },
    /// Train the membership classifier on labeled feature files.
    TrainAttack {
        #[arg(long)]
        config: PathBuf,
        /// Labeled feature files, one or more (repeat the flag).
        #[arg(long, required = true)]
        features: Vec<PathBuf>,
        #[arg(long)]
        classifier_out: PathBuf,
    },
    /// Score feature files with a trained classifier.
    Infer {
        #[arg(long)]
        classifier: PathBuf,
        #[arg(long, required = true)]
        features: Vec<PathBuf>,
        #[arg(long)]
        scores_out: PathBuf,
    },
    /// Evaluate emitted scores against ground-truth label files.
    Evaluate {
        #[arg(long)]
        scores: PathBuf,
        /// Directory of ground-truth CSVs (record_id,is_member).
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        metrics_out: PathBuf,
    },
    /// Run the whole experiment end to end.
    RunChallenge {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("TABMIA_LOG", "warn")).init();
    let cli = Cli::parse();
    if let Some(workers) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
        {
            log::warn!("could not configure {workers} workers: {e}");
        }
    }
    if let Err(err) = dispatch(cli) {
        eprintln!("{}", err.to_stderr_json());
        std::process::exit(err.code());
    }
}

fn load_config(path: &Path, seed_override: Option<u64>) -> Result<RunConfig> {
    let file = File::open(path).map_err(|e| {
        CliError::MissingFile(format!("config {}: {e}", path.display()))
    })?;
    let mut cfg: RunConfig = serde_json::from_reader(BufReader::new(file))?;
    if let Some(seed) = seed_override {
        cfg.master_seed = seed;
    }
    cfg.generator.validate().map_err(CliError::from)?;
    cfg.challenge.validate().map_err(CliError::from)?;
    Ok(cfg)
}

#[derive(Serialize)]
struct StageLog<'a> {
    stage: &'a str,
    master_seed: Option<u64>,
    config_hash: Option<String>,
}

/// Records the stage's effective seed and config hash under
/// `<dir>/stage_logs/<stage>.json`.
fn write_stage_log(dir: &Path, stage: &str, cfg: Option<&RunConfig>) -> Result<()> {
    let log_dir = dir.join("stage_logs");
    std::fs::create_dir_all(&log_dir)?;
    let log = StageLog {
        stage,
        master_seed: cfg.map(|c| c.master_seed),
        config_hash: cfg.map(config_hash),
    };
    let mut f = BufWriter::new(File::create(log_dir.join(format!("{stage}.json")))?);
    serde_json::to_writer_pretty(&mut f, &log)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

fn out_parent(path: &Path) -> PathBuf {
    path.parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenData { config, out } => {
            let cfg = load_config(&config, cli.seed)?;
            prepare_experiment_data(&cfg, &out)?;
            write_stage_log(&out, "gen-data", Some(&cfg))
        }
        Command::TrainTarget {
            config,
            out,
            model_id,
        } => {
            let cfg = load_config(&config, cli.seed)?;
            train_target(&cfg, &out, model_id)?;
            write_stage_log(&out, &format!("train-target-m{model_id:03}"), Some(&cfg))
        }
        Command::Synth {
            config,
            out,
            model_id,
            count,
        } => {
            let cfg = load_config(&config, cli.seed)?;
            synthesize_dump(&cfg, &out, model_id, count)?;
            write_stage_log(&out, &format!("synth-m{model_id:03}"), Some(&cfg))
        }
        Command::ExtractFeatures {
            config,
            out,
            model_id,
            records,
            features_out,
        } => {
            let cfg = load_config(&config, cli.seed)?;
            cmd_extract_features(&cfg, &out, model_id, records, features_out)?;
            write_stage_log(
                &out,
                &format!("extract-features-m{model_id:03}"),
                Some(&cfg),
            )
        }
        Command::TrainAttack {
            config,
            features,
            classifier_out,
        } => {
            let cfg = load_config(&config, cli.seed)?;
            cmd_train_attack(&cfg, &features, &classifier_out)?;
            write_stage_log(&out_parent(&classifier_out), "train-attack", Some(&cfg))
        }
        Command::Infer {
            classifier,
            features,
            scores_out,
        } => {
            cmd_infer(&classifier, &features, &scores_out)?;
            write_stage_log(&out_parent(&scores_out), "infer", None)
        }
        Command::Evaluate {
            scores,
            truth,
            metrics_out,
        } => {
            cmd_evaluate(&scores, &truth, &metrics_out)?;
            write_stage_log(&metrics_out, "evaluate", None)
        }
        Command::RunChallenge { config, out } => {
            let cfg = load_config(&config, cli.seed)?;
            let artifacts = run_challenge(&cfg, &out)?;
            log::info!(
                "challenge complete: scores at {}, metrics at {}",
                artifacts.scores_csv.display(),
                artifacts.metrics_json.display()
            );
            write_stage_log(&out, "run-challenge", Some(&cfg))
        }
    }
}

fn cmd_extract_features(
    cfg: &RunConfig,
    out: &Path,
    model_id: u32,
    records: Option<PathBuf>,
    features_out: Option<PathBuf>,
) -> Result<()> {
    let handle = ExperimentHandle::open(out)?;
    let denoiser = handle.denoiser(model_id)?;
    let records_path = records.unwrap_or_else(|| challenge_csv_path(out, model_id));
    if !records_path.exists() {
        return Err(CliError::MissingFile(format!(
            "records file {}",
            records_path.display()
        )));
    }
    let (queries, labels) = read_challenge_csv(&records_path, &handle.schema)?;
    let encoded: Vec<(u64, Vec<f64>)> = queries
        .iter()
        .map(|(id, row)| Ok((*id, encode(&handle.schema, &handle.stats, row, *id)?.vector)))
        .collect::<std::result::Result<_, tabmia_core::tabular::TabularError>>()?;

    let schedule = build_schedule::<f64>(
        cfg.diffusion.t_total,
        cfg.diffusion.beta_start,
        cfg.diffusion.beta_end,
    )?;
    let noise_set = NoiseSet::generate(
        cfg.attack.n_eps,
        handle.schema.encoded_dim(),
        derive_seed(cfg.master_seed, "noise-set"),
    );
    let time_set = TimeSet::new(cfg.attack.timesteps.clone(), cfg.diffusion.t_total)?;
    let matrix = extract_features(
        &denoiser,
        &encoded,
        &noise_set,
        &time_set,
        &schedule,
        model_id,
        labels.as_deref(),
    )?;
    let path = features_out
        .unwrap_or_else(|| checkpoint_path(out, model_id).with_file_name("features.bin"));
    write_feature_matrix(&path, &matrix)?;
    Ok(())
}

fn cmd_train_attack(cfg: &RunConfig, features: &[PathBuf], classifier_out: &Path) -> Result<()> {
    let mut matrices = Vec::new();
    for path in features {
        matrices.push(read_feature_matrix(path)?);
    }
    let mut model_ids: Vec<u32> = matrices
        .iter()
        .flat_map(|m| m.model_ids.iter().copied())
        .collect();
    model_ids.sort_unstable();
    model_ids.dedup();
    let split = model_based_split(&model_ids, derive_seed(cfg.master_seed, "attack-split"))?;

    let pool = |ids: &[u32]| -> Result<FeatureMatrix> {
        let parts: Vec<&FeatureMatrix> = matrices
            .iter()
            .filter(|m| m.model_ids.first().is_some_and(|id| ids.contains(id)))
            .collect();
        Ok(FeatureMatrix::concat(&parts)?)
    };
    let classifier = train_attack_classifier(
        &pool(&split.train)?,
        &pool(&split.val)?,
        &cfg.attack.grid,
        cfg.attack.epochs,
        derive_seed(cfg.master_seed, "attack-train"),
        cfg.attack.fpr_level,
    )?;
    write_classifier(classifier_out, &classifier)?;
    Ok(())
}

fn cmd_infer(classifier: &Path, features: &[PathBuf], scores_out: &Path) -> Result<()> {
    let clf = read_classifier(classifier)?;
    let mut scores = Vec::new();
    for path in features {
        let matrix = read_feature_matrix(path)?;
        scores.extend(score_records(&clf, &matrix)?);
    }
    write_scores_csv(scores_out, &scores)?;
    Ok(())
}

/// Generic evaluation: joins a scores CSV against a directory of
/// `record_id,is_member` files (one per model, `m<id>.csv`) and reports
/// per-model metrics plus one pooled entry.
fn cmd_evaluate(scores: &Path, truth: &Path, metrics_out: &Path) -> Result<()> {
    use std::collections::{BTreeMap, HashMap};
    let rows = tabmia_core::attack::read_scores_csv(scores)?;
    let mut by_model: BTreeMap<u32, Vec<&tabmia_core::attack::ScoreRecord>> = BTreeMap::new();
    for r in &rows {
        by_model.entry(r.model_id).or_default().push(r);
    }

    let mut reports = Vec::new();
    let mut curves = Vec::new();
    let mut pooled_scores = Vec::new();
    let mut pooled_labels = Vec::new();
    for (&model_id, model_rows) in &by_model {
        let truth_path = truth.join(format!("m{model_id:03}.csv"));
        let text = std::fs::read_to_string(&truth_path).map_err(|e| {
            CliError::MissingFile(format!("ground truth {}: {e}", truth_path.display()))
        })?;
        let mut labels_by_record: HashMap<u64, bool> = HashMap::new();
        for line in text.lines().skip(1) {
            if let Some((id, label)) = line.split_once(',') {
                let id: u64 = id
                    .parse()
                    .map_err(|_| CliError::Data(format!("bad record_id '{id}'")))?;
                labels_by_record.insert(id, label == "1");
            }
        }
        let mut s = Vec::with_capacity(model_rows.len());
        let mut l = Vec::with_capacity(model_rows.len());
        for r in model_rows {
            s.push(r.score);
            l.push(*labels_by_record.get(&r.record_id).ok_or_else(|| {
                CliError::Data(format!(
                    "record {} of model {model_id} has no ground truth",
                    r.record_id
                ))
            })?);
        }
        let id = format!("m{model_id:03}");
        reports.push(report_for(&id, &s, &l)?);
        curves.push((id, compute_roc(&s, &l)?));
        pooled_scores.extend(s);
        pooled_labels.extend(l);
    }
    if !pooled_scores.is_empty() {
        reports.push(report_for("pooled", &pooled_scores, &pooled_labels)?);
        curves.push(("pooled".into(), compute_roc(&pooled_scores, &pooled_labels)?));
    }
    emit_report(&reports, &curves, metrics_out)?;
    Ok(())
}

fn report_for(id: &str, scores: &[f64], labels: &[bool]) -> Result<MetricReport> {
    Ok(MetricReport {
        id: id.to_string(),
        auc: auc(scores, labels)?,
        tpr_at_fpr: [(
            MetricReport::fpr_key(0.10),
            tpr_at_fpr(scores, labels, 0.10)?,
        )]
        .into_iter()
        .collect(),
        n_pos: labels.iter().filter(|&&l| l).count(),
        n_neg: labels.iter().filter(|&&l| !l).count(),
    })
}
