//! End-to-end pipeline tests driving the installed binary: artifact
//! production, rerun determinism, ablation tags, and exit codes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn hrgr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hrgr"))
        .args(args)
        .output()
        .expect("binary must spawn")
}

fn run_ok(args: &[&str]) -> Output {
    let out = hrgr(args);
    assert!(
        out.status.success(),
        "command {:?} failed:\n{}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn exit_code(args: &[&str]) -> i32 {
    hrgr(args).status.code().expect("no exit code")
}

fn small_config(dir: &Path) -> PathBuf {
    let path = dir.join("cfg.json");
    fs::write(
        &path,
        r#"{
            "synth": {"n_samples": 120},
            "template_df_fraction": 0.02,
            "d_hidden": 16,
            "d_embed": 16,
            "train": {"xe_epochs": 2, "rl_epochs": 1, "batch_size": 8}
        }"#,
    )
    .unwrap();
    path
}

/// gen-data, mine-templates, train, evaluate, generate against one
/// directory with a fixed seed.
fn run_pipeline(cfg: &str, out: &str, seed: &str) -> String {
    run_ok(&["gen-data", "--config", cfg, "--seed", seed, "--out", out]);
    run_ok(&["mine-templates", "--config", cfg, "--seed", seed, "--out", out]);
    run_ok(&["train", "--config", cfg, "--seed", seed, "--out", out]);
    run_ok(&["evaluate", "--config", cfg, "--seed", seed, "--out", out]);
    let gen = run_ok(&["generate", "--config", cfg, "--seed", seed, "--out", out, "s00005"]);
    String::from_utf8(gen.stdout).unwrap()
}

#[test]
fn pipeline_produces_all_artifacts_and_reruns_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let cfg = cfg.to_str().unwrap();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");

    let gen_a = run_pipeline(cfg, out_a.to_str().unwrap(), "11");

    // Every sentence carries a source tag.
    assert!(!gen_a.trim().is_empty());
    for line in gen_a.lines() {
        assert!(
            line.starts_with("[G] ") || (line.starts_with("[T:") && line.contains("] ")),
            "untagged sentence: {line}"
        );
    }

    // The split files partition the corpus by id.
    let ids: Vec<Vec<String>> = ["train", "val", "test"]
        .iter()
        .map(|split| {
            fs::read_to_string(out_a.join(format!("{split}.jsonl")))
                .unwrap()
                .lines()
                .map(|l| {
                    serde_json::from_str::<serde_json::Value>(l).unwrap()["id"]
                        .as_str()
                        .unwrap()
                        .to_string()
                })
                .collect()
        })
        .collect();
    let total: usize = ids.iter().map(Vec::len).sum();
    assert_eq!(total, 120);
    let unique: std::collections::BTreeSet<&String> = ids.iter().flatten().collect();
    assert_eq!(unique.len(), total, "split ids must be disjoint");

    // The echoed config parses back to the original semantics: feeding it
    // back through the pipeline must behave identically (checked below by
    // rerunning with the original file; echo equality is structural).
    let echoed = fs::read_to_string(out_a.join("config.json")).unwrap();
    let original = fs::read_to_string(cfg).unwrap();
    let echoed_v: serde_json::Value = serde_json::from_str(&echoed).unwrap();
    let original_v: serde_json::Value = serde_json::from_str(&original).unwrap();
    for (key, val) in original_v.as_object().unwrap() {
        if let Some(sub) = val.as_object() {
            for (k2, v2) in sub {
                assert_eq!(&echoed_v[key][k2], v2, "echo drifted at {key}.{k2}");
            }
        } else {
            assert_eq!(&echoed_v[key], val, "echo drifted at {key}");
        }
    }

    // Metrics JSON has the documented shape.
    let metrics: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_a.join("metrics.json")).unwrap()).unwrap();
    for key in ["cider", "bleu1", "bleu2", "bleu3", "bleu4", "rouge_l", "precision", "afp", "per_term"]
    {
        assert!(metrics.get(key).is_some(), "metrics.json missing {key}");
    }
    assert!(out_a.join("metrics_raw.json").exists());

    // Identical config + seed => byte-identical primary outputs.
    let gen_b = run_pipeline(cfg, out_b.to_str().unwrap(), "11");
    assert_eq!(gen_a, gen_b);
    for name in [
        "train.jsonl",
        "val.jsonl",
        "test.jsonl",
        "templates.json",
        "vocab.json",
        "xe.ckpt",
        "best.ckpt",
        "metrics.json",
        "metrics_raw.json",
        "predictions.jsonl",
        "config.json",
    ] {
        let a = fs::read(out_a.join(name)).unwrap();
        let b = fs::read(out_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn retrieval_only_ablation_tags_every_sentence_as_template() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let cfg = cfg.to_str().unwrap();
    let out = dir.path().join("run");
    let out = out.to_str().unwrap();

    run_ok(&["gen-data", "--config", cfg, "--seed", "3", "--out", out]);
    run_ok(&["mine-templates", "--config", cfg, "--seed", "3", "--out", out]);
    run_ok(&[
        "train", "--config", cfg, "--seed", "3", "--out", out, "--ablation", "retrieval-only",
    ]);
    let gen = run_ok(&[
        "generate", "--config", cfg, "--seed", "3", "--out", out, "--ablation",
        "retrieval-only", "s00002",
    ]);
    let text = String::from_utf8(gen.stdout).unwrap();
    assert!(!text.trim().is_empty());
    for line in text.lines() {
        assert!(line.starts_with("[T:"), "non-template sentence under ablation: {line}");
    }

    // Disabling postprocess suppresses the raw-metrics sidecar.
    run_ok(&[
        "evaluate", "--config", cfg, "--seed", "3", "--out", out, "--no-postprocess",
    ]);
    assert!(dir.path().join("run/metrics.json").exists());
    assert!(!dir.path().join("run/metrics_raw.json").exists());
}

#[test]
fn error_paths_use_documented_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let cfg = cfg.to_str().unwrap();
    let out = dir.path().join("run");
    let out = out.to_str().unwrap();

    // Config errors: ratios that do not sum to 1, unknown keys, and a
    // missing mandatory seed.
    let bad_ratio = dir.path().join("ratio.json");
    fs::write(&bad_ratio, r#"{"split": {"train": 0.5, "val": 0.2, "test": 0.2}}"#).unwrap();
    assert_eq!(
        exit_code(&["gen-data", "--config", bad_ratio.to_str().unwrap(), "--seed", "1", "--out", out]),
        2
    );
    let typo = dir.path().join("typo.json");
    fs::write(&typo, r#"{"vocab_minfreq": 3}"#).unwrap();
    assert_eq!(
        exit_code(&["gen-data", "--config", typo.to_str().unwrap(), "--seed", "1", "--out", out]),
        2
    );
    assert_eq!(exit_code(&["gen-data", "--out", out]), 2);

    // Data errors: missing inputs and overwrite refusal.
    assert_eq!(exit_code(&["evaluate", "--config", cfg, "--seed", "1", "--out", out]), 3);
    run_ok(&["gen-data", "--config", cfg, "--seed", "1", "--out", out]);
    let refusal = hrgr(&["gen-data", "--config", cfg, "--seed", "1", "--out", out]);
    assert_eq!(refusal.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&refusal.stderr).contains("--force"));
    run_ok(&["gen-data", "--config", cfg, "--seed", "1", "--out", out, "--force"]);

    // A threshold demanding presence in every document mines nothing and
    // advises lowering it.
    let all_docs = dir.path().join("alldocs.json");
    fs::write(&all_docs, r#"{"template_df_fraction": 1.0}"#).unwrap();
    let mined = hrgr(&[
        "mine-templates", "--config", all_docs.to_str().unwrap(), "--seed", "1", "--out", out,
    ]);
    assert_eq!(mined.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&mined.stderr).contains("lower the threshold"));

    // An unknown sample id after a full prep is a data error.
    run_ok(&["mine-templates", "--config", cfg, "--seed", "1", "--out", out]);
    run_ok(&["train", "--config", cfg, "--seed", "1", "--out", out]);
    let missing = hrgr(&["generate", "--config", cfg, "--seed", "1", "--out", out, "zz999"]);
    assert_eq!(missing.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("zz999"));
}

#[test]
fn checkpoint_template_mismatch_names_both_sides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let cfg = cfg.to_str().unwrap();
    let out = dir.path().join("run");
    let out_s = out.to_str().unwrap();

    run_ok(&["gen-data", "--config", cfg, "--seed", "5", "--out", out_s]);
    run_ok(&["mine-templates", "--config", cfg, "--seed", "5", "--out", out_s]);
    run_ok(&["train", "--config", cfg, "--seed", "5", "--out", out_s]);

    // Remine with a stricter threshold: fewer groups than the checkpoint.
    let strict = dir.path().join("strict.json");
    fs::write(
        &strict,
        r#"{
            "synth": {"n_samples": 120},
            "template_df_fraction": 0.5,
            "d_hidden": 16,
            "d_embed": 16,
            "train": {"xe_epochs": 2, "rl_epochs": 1, "batch_size": 8}
        }"#,
    )
    .unwrap();
    let strict = strict.to_str().unwrap();
    run_ok(&["mine-templates", "--config", strict, "--seed", "5", "--out", out_s, "--force"]);

    let eval = hrgr(&["evaluate", "--config", strict, "--seed", "5", "--out", out_s]);
    assert_eq!(eval.status.code(), Some(3));
    let msg = String::from_utf8_lossy(&eval.stderr).to_string();
    assert!(msg.contains("templates="), "error must name dims: {msg}");
}
