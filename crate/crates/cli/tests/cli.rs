//! CLI contract tests: stagewise pipeline, determinism, exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tabmia_core::challenge::{ChallengeSpec, PhaseCounts, Track};
use tabmia_core::config::{AttackSection, DiffusionSection, EvaluationSection, RunConfig};
use tabmia_core::tabular::{ColumnSpec, GeneratorConfig, MixtureComponent, TableSchema};

fn tabmia() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tabmia"))
}

fn run(args: &[&str]) -> Output {
    tabmia().args(args).output().expect("binary runs")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "command failed: {}\n{}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
}

fn micro_config() -> RunConfig {
    RunConfig {
        master_seed: 11,
        challenge: ChallengeSpec {
            counts: PhaseCounts {
                train_phase: 3,
                dev_phase: 1,
                final_phase: 1,
            },
            members_per_model: 8,
            challenge_queries_per_model: 8,
            track: Track::WhiteBox,
        },
        generator: GeneratorConfig {
            schema: TableSchema::new(vec![
                ColumnSpec::numerical("x"),
                ColumnSpec::categorical("k", &["a", "b"]),
            ])
            .unwrap(),
            n_rows: 150,
            components: vec![MixtureComponent {
                weight: 1.0,
                numerical_means: vec![0.0],
                numerical_stds: vec![1.0],
                categorical_probs: vec![vec![0.5, 0.5]],
            }],
        },
        diffusion: DiffusionSection {
            t_total: 12,
            beta_start: 1e-3,
            beta_end: 0.1,
            hidden_sizes: vec![12, 12],
            embed_dim: 4,
            train_steps: 40,
            batch_size: 8,
            lr: 1e-3,
        },
        attack: AttackSection {
            n_eps: 3,
            timesteps: vec![2, 5],
            grid: tabmia_core::attack::HparamGrid {
                hidden_widths: vec![8],
                lrs: vec![1e-2],
            },
            epochs: 30,
            fpr_level: 0.10,
            secmi_stride: 1,
            best_noise_candidates: 4,
        },
        evaluation: EvaluationSection::default(),
    }
}

fn write_config(dir: &Path) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(&micro_config()).unwrap()).unwrap();
    path
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tabmia-cli-{tag}"));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn stagewise_pipeline_matches_run_challenge_artifacts() {
    let work = temp_dir("stagewise");
    let config = write_config(&work);
    let exp = work.join("exp");
    let exp_s = exp.to_str().unwrap();
    let cfg_s = config.to_str().unwrap();

    assert_ok(&run(&["gen-data", "--config", cfg_s, "--out", exp_s]));
    assert!(exp.join("population.csv").exists());
    assert!(exp.join("schema.json").exists());
    assert!(exp.join("stage_logs/gen-data.json").exists());

    for id in 0..5 {
        assert_ok(&run(&[
            "train-target",
            "--config",
            cfg_s,
            "--out",
            exp_s,
            "--model-id",
            &id.to_string(),
        ]));
    }
    assert!(exp.join("models/m004/checkpoint.bin").exists());

    assert_ok(&run(&[
        "synth",
        "--config",
        cfg_s,
        "--out",
        exp_s,
        "--model-id",
        "0",
        "--count",
        "5",
    ]));
    let synth = std::fs::read_to_string(exp.join("models/m000/synth.csv")).unwrap();
    assert_eq!(synth.lines().count() - 1, 5);

    let mut train_features = Vec::new();
    for id in 0..5 {
        assert_ok(&run(&[
            "extract-features",
            "--config",
            cfg_s,
            "--out",
            exp_s,
            "--model-id",
            &id.to_string(),
        ]));
        let f = exp.join(format!("models/m{id:03}/features.bin"));
        assert!(f.exists());
        if id < 3 {
            train_features.push(f);
        }
    }

    let classifier = work.join("classifier.bin");
    let mut cmd = vec![
        "train-attack".to_string(),
        "--config".into(),
        cfg_s.into(),
        "--classifier-out".into(),
        classifier.to_str().unwrap().into(),
    ];
    for f in &train_features {
        cmd.push("--features".into());
        cmd.push(f.to_str().unwrap().into());
    }
    let args: Vec<&str> = cmd.iter().map(String::as_str).collect();
    assert_ok(&run(&args));
    assert!(classifier.exists());

    let scores = work.join("scores.csv");
    assert_ok(&run(&[
        "infer",
        "--classifier",
        classifier.to_str().unwrap(),
        "--features",
        exp.join("models/m003/features.bin").to_str().unwrap(),
        "--features",
        exp.join("models/m004/features.bin").to_str().unwrap(),
        "--scores-out",
        scores.to_str().unwrap(),
    ]));
    let text = std::fs::read_to_string(&scores).unwrap();
    assert_eq!(text.lines().next().unwrap(), "model_id,record_id,score");
    assert_eq!(text.lines().count() - 1, 16);

    let metrics = work.join("metrics");
    assert_ok(&run(&[
        "evaluate",
        "--scores",
        scores.to_str().unwrap(),
        "--truth",
        exp.join("ground_truth").to_str().unwrap(),
        "--metrics-out",
        metrics.to_str().unwrap(),
    ]));
    let metrics_text = std::fs::read_to_string(metrics.join("metrics.json")).unwrap();
    assert!(metrics_text.contains("\"pooled\""));
}

#[test]
fn rerunning_a_stage_is_byte_identical() {
    let work = temp_dir("idempotent");
    let config = write_config(&work);
    let exp = work.join("exp");
    let args = [
        "gen-data",
        "--config",
        config.to_str().unwrap(),
        "--out",
        exp.to_str().unwrap(),
    ];
    assert_ok(&run(&args));
    let first = std::fs::read(exp.join("population.csv")).unwrap();
    let first_truth = std::fs::read(exp.join("ground_truth/m000.csv")).unwrap();
    assert_ok(&run(&args));
    assert_eq!(first, std::fs::read(exp.join("population.csv")).unwrap());
    assert_eq!(
        first_truth,
        std::fs::read(exp.join("ground_truth/m000.csv")).unwrap()
    );
}

#[test]
fn seed_flag_overrides_the_config_file() {
    let work = temp_dir("seed-override");
    let config = write_config(&work);
    let a = work.join("a");
    let b = work.join("b");
    assert_ok(&run(&[
        "gen-data",
        "--config",
        config.to_str().unwrap(),
        "--out",
        a.to_str().unwrap(),
    ]));
    assert_ok(&tabmia()
        .args([
            "gen-data",
            "--config",
            config.to_str().unwrap(),
            "--out",
            b.to_str().unwrap(),
            "--seed",
            "999",
        ])
        .output()
        .unwrap());
    assert_ne!(
        std::fs::read(a.join("population.csv")).unwrap(),
        std::fs::read(b.join("population.csv")).unwrap()
    );
    let log: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(b.join("stage_logs/gen-data.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(log["master_seed"], 999);
    assert!(log["config_hash"].as_str().unwrap().len() == 64);
}

#[test]
fn evaluate_reports_perfect_separation_as_auc_one() {
    let work = temp_dir("evaluate-perfect");
    let truth_dir = work.join("truth");
    std::fs::create_dir_all(&truth_dir).unwrap();
    std::fs::write(
        truth_dir.join("m000.csv"),
        "record_id,is_member\n1,1\n2,1\n3,0\n4,0\n",
    )
    .unwrap();
    let scores = work.join("scores.csv");
    std::fs::write(
        &scores,
        "model_id,record_id,score\n0,1,0.900000\n0,2,0.800000\n0,3,0.100000\n0,4,0.200000\n",
    )
    .unwrap();
    let metrics = work.join("metrics");
    assert_ok(&run(&[
        "evaluate",
        "--scores",
        scores.to_str().unwrap(),
        "--truth",
        truth_dir.to_str().unwrap(),
        "--metrics-out",
        metrics.to_str().unwrap(),
    ]));
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(metrics.join("metrics.json")).unwrap())
            .unwrap();
    let pooled = parsed
        .as_array()
        .unwrap()
        .iter()
        .find(|m| m["id"] == "pooled")
        .unwrap();
    assert_eq!(pooled["auc"], 1.0);
    assert_eq!(pooled["tpr_at_fpr"]["0.10"], 1.0);
}

#[test]
fn missing_config_exits_3_with_error_json() {
    let out = run(&["gen-data", "--config", "/nonexistent/config.json", "--out", "/tmp/x"]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    let parsed: serde_json::Value = serde_json::from_str(stderr.trim()).expect("stderr is JSON");
    assert_eq!(parsed["error"]["code"], 3);
    assert_eq!(parsed["error"]["kind"], "missing_file");
}

#[test]
fn invalid_config_exits_2() {
    let work = temp_dir("invalid-config");
    let mut cfg = micro_config();
    cfg.generator.components[0].weight = 0.5; // weights no longer sum to 1
    let path = work.join("bad.json");
    std::fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let out = run(&[
        "gen-data",
        "--config",
        path.to_str().unwrap(),
        "--out",
        work.join("exp").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let parsed: serde_json::Value =
        serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
    assert_eq!(parsed["error"]["kind"], "config");
}

#[test]
fn bundled_tiny_config_parses_and_round_trips() {
    let tiny = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/tiny.json");
    let text = std::fs::read_to_string(tiny).unwrap();
    let cfg: RunConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(cfg.challenge.counts.train_phase, 6);
    assert_eq!(cfg.challenge.counts.dev_phase, 2);
    assert_eq!(cfg.challenge.counts.final_phase, 2);
    assert_eq!(cfg.challenge.members_per_model, 64);
    assert_eq!(cfg.attack.n_eps, 32);
    assert_eq!(cfg.attack.timesteps, vec![5, 10, 20, 50]);
    let reserialized = serde_json::to_string(&cfg).unwrap();
    let back: RunConfig = serde_json::from_str(&reserialized).unwrap();
    assert_eq!(cfg, back);
}
