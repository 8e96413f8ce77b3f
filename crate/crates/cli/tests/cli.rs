use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use spikelab_core::ingest::{write_idx_images, write_idx_labels, IdxImages};
use spikelab_core::model::ModelConfig;

fn spikelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spikelab")).args(args).output().expect("binary runs")
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn small_model(dir: &Path) -> String {
    let path = dir.join("model.json");
    ModelConfig {
        p: 300,
        n: 150,
        class_sizes: vec![50, 50, 50],
        mean_norms: vec![3.0, 4.0, 5.0],
        noise_std: 1.0,
        seed: 9,
    }
    .save(&path)
    .unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn theory_prints_reference_values() {
    let out = spikelab(&["theory", "--ell", "8.325,5.344,2.997", "--c", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for v in ["5.7826", "4.3591", "3.3322", "0.86700", "0.78338", "0.58285"] {
        assert!(text.contains(v), "missing {v} in\n{text}");
    }
}

#[test]
fn theory_report_marks_undetectable_spike() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("t");
    let out = spikelab(&["theory", "--ell", "1.0", "--c", "2", "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success());
    let r = report(&out_dir);
    assert_eq!(r["status"], "ok");
    let spike = &r["theory"]["spikes"][0];
    assert_eq!(spike["detectable"], false);
    assert_eq!(spike["zeta"], 0.0);
}

#[test]
fn usage_errors_exit_with_2() {
    assert_eq!(spikelab(&["theory", "--ell", "1", "--c", "-1"]).status.code(), Some(2));
    assert_eq!(spikelab(&["theory", "--ell", "-3", "--c", "1"]).status.code(), Some(2));
    assert_eq!(spikelab(&["bogus"]).status.code(), Some(2));
    assert_eq!(spikelab(&["esd", "--pure-noise", "--n", "5000", "--p", "10"]).status.code(), Some(2));
    assert_eq!(spikelab(&["fmnist", "--data-dir", "/nonexistent/dir"]).status.code(), Some(2));
    assert_eq!(spikelab(&["fmnist", "--pairs", "3,3"]).status.code(), Some(2));
}

#[test]
fn bad_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"p": 10, "n": 4, "class_sizes": [2, 1], "mean_norms": [1, 1], "seed": 0}"#).unwrap();
    let out = spikelab(&["synth", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("class sizes"));
}

#[test]
fn clt_rejects_undetectable_spikes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("weak.json");
    ModelConfig {
        p: 400,
        n: 200,
        class_sizes: vec![100, 100],
        mean_norms: vec![0.5, 4.0],
        noise_std: 1.0,
        seed: 1,
    }
    .save(&cfg)
    .unwrap();
    let out = spikelab(&["clt", "--config", cfg.to_str().unwrap(), "--seeds", "2", "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("detection threshold"));
}

#[test]
fn synth_writes_expected_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_model(dir.path());
    let out_dir = dir.path().join("s");
    let out = spikelab(&["synth", "--config", &cfg, "--subset", "50", "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["report.json", "esd.csv", "esd.svg", "eigvec_1.csv", "eigvec_3.svg", "residuals_2.csv", "residuals_3.svg"] {
        assert!(out_dir.join(f).exists(), "missing {f}");
    }
    let header = std::fs::read_to_string(out_dir.join("eigvec_1.csv")).unwrap();
    assert!(header.starts_with("index,v_hat,sqrt_zeta_v\n"));
    let esd = std::fs::read_to_string(out_dir.join("esd.csv")).unwrap();
    assert_eq!(esd.lines().count(), 151);
    let svg = std::fs::read_to_string(out_dir.join("esd.svg")).unwrap();
    assert_eq!(svg.matches("<svg").count(), 1);
    assert!(svg.trim_end().ends_with("</svg>"));

    let r = report(&out_dir);
    assert_eq!(r["command"], "synth");
    assert_eq!(r["status"], "ok");
    assert_eq!(r["empirics"]["spikes"].as_array().unwrap().len(), 3);
    assert!(r["timings"]["solve"].as_f64().unwrap() >= 0.0);
}

#[test]
fn reports_are_deterministic_modulo_timings() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_model(dir.path());
    let run = |name: &str| {
        let out_dir = dir.path().join(name);
        let out = spikelab(&["clt", "--config", &cfg, "--seeds", "3", "--subset", "60", "--out", out_dir.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let mut r = report(&out_dir);
        r.as_object_mut().unwrap().remove("timings");
        r["config"].as_object_mut().unwrap().remove("out");
        (r, std::fs::read(out_dir.join("ks_1.csv")).unwrap())
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn esd_pure_noise_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("e");
    let out = spikelab(&["esd", "--pure-noise", "--n", "200", "--p", "100", "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out_dir);
    assert_eq!(r["config"]["source"]["kind"], "pure_noise");
    assert!(r["empirics"]["ks"]["statistic"].as_f64().unwrap() < 0.15);
}

#[test]
fn fmnist_on_tiny_idx_files() {
    let dir = tempfile::tempdir().unwrap();
    // Two classes whose images differ in which half of the pixels is bright.
    let (count, side) = (60usize, 4usize);
    let mut pixels = Vec::with_capacity(count * side * side);
    let mut labels = Vec::with_capacity(count);
    for i in 0..count {
        let label = (i % 2) as u8;
        labels.push(label);
        for px in 0..side * side {
            let bright = (px < side * side / 2) == (label == 0);
            let jitter = ((i * 31 + px * 17) % 23) as u8;
            pixels.push(if bright { 200 + jitter } else { 20 + jitter });
        }
    }
    let images = IdxImages {
        count,
        rows: side,
        cols: side,
        pixels,
    };
    let (img, lab) = (dir.path().join("img"), dir.path().join("lab"));
    write_idx_images(&img, &images).unwrap();
    write_idx_labels(&lab, &labels).unwrap();
    let out_dir = dir.path().join("f");
    let out = spikelab(&[
        "fmnist",
        "--images",
        img.to_str().unwrap(),
        "--labels",
        lab.to_str().unwrap(),
        "--pairs",
        "1,0",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("accuracy.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "k1,k2,class1,class2,n,zeta_hat,observed,predicted,eigenvalue");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&row[..5], &["0", "1", "T-shirt/top", "Trouser", "60"]);
    assert_eq!(row[6].parse::<f64>().unwrap(), 1.0);
    assert!(out_dir.join("accuracy_matrix.svg").exists());
}
