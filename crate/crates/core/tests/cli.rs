use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn pfclust(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pfclust"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

/// Two tight blobs far apart on the diagonal, labels in column 3.
fn two_far_blobs(dir: &Path) -> PathBuf {
    let mut text = String::new();
    for i in 0..15 {
        let t = i as f64 * 0.4;
        text += &format!("{},{},a\n", t.sin() * 0.5, t.cos() * 0.5);
    }
    for i in 0..15 {
        let t = i as f64 * 0.4;
        text += &format!("{},{},b\n", 100.0 + t.cos() * 0.5, 100.0 + t.sin() * 0.5);
    }
    let p = dir.join("two.csv");
    std::fs::write(&p, text).unwrap();
    p
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synthetic_corpus(dir: &Path, count: u64) -> PathBuf {
    let mut manifest = String::new();
    for seed in 1..=count {
        let file = dir.join(format!("s{seed}.csv"));
        let k = 2 + seed % 3;
        let out = pfclust(&[
            "generate", "--clusters", &k.to_string(), "--points", "40", "--dim", "4", "--separation", "10",
            "--seed", &seed.to_string(), "--output", path_str(&file),
        ]);
        assert!(out.status.success());
        manifest += &format!(
            "[[dataset]]\nname = \"s{seed}\"\npath = \"s{seed}.csv\"\ntruth_k = {k}\nlabel_column = 5\n\n"
        );
    }
    manifest += "[[dataset]]\nname = \"absent\"\npath = \"absent.csv\"\ntruth_k = 3\n";
    let p = dir.join("corpus.toml");
    std::fs::write(&p, manifest).unwrap();
    p
}

#[test]
fn cluster_two_far_blobs() {
    let dir = TempDir::new().unwrap();
    let input = two_far_blobs(dir.path());
    let out = pfclust(&["cluster", "--input", path_str(&input), "--label-col", "3"]);
    let v = stdout_json(&out);
    assert_eq!(v["final_count"], 2);
    assert_eq!(v["outlier_count"], 0);
    assert_eq!(v["schema_version"], 1);
    let a: Vec<u64> = v["assignment"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
    assert!(a[..15].iter().all(|&c| c == a[0]));
    assert!(a[15..].iter().all(|&c| c == a[15]));
    assert_ne!(a[0], a[15]);
    // six decimals, always
    let text = String::from_utf8(out.stdout).unwrap();
    let raw = text.split("\"threshold\":").nth(1).unwrap().split(',').next().unwrap();
    assert_eq!(raw.split('.').nth(1).unwrap().len(), 6, "{raw}");
    assert!(!text.contains("timings"));
}

#[test]
fn cluster_csv_lists_every_point() {
    let dir = TempDir::new().unwrap();
    let input = two_far_blobs(dir.path());
    let out = pfclust(&["cluster", "--input", path_str(&input), "--label-col", "3", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# schema_version=1\n"));
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body[0], "point,cluster");
    assert_eq!(body.len(), 31);
}

#[test]
fn evaluate_scores_perfect_partition() {
    let dir = TempDir::new().unwrap();
    let input = two_far_blobs(dir.path());
    let v = stdout_json(&pfclust(&["evaluate", "--input", path_str(&input), "--label-col", "3"]));
    assert_eq!(v["ari"].as_f64(), Some(1.0));
    assert_eq!(v["jaccard"].as_f64(), Some(1.0));
    assert_eq!(v["f1"].as_f64(), Some(1.0));
    assert_eq!(v["exact_match"], true);
    assert_eq!(v["truth_k"], 2);
}

#[test]
fn evaluate_without_labels_exits_2() {
    let dir = TempDir::new().unwrap();
    let input = two_far_blobs(dir.path());
    let out = pfclust(&["evaluate", "--input", path_str(&input)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn input_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.csv");
    assert_eq!(pfclust(&["cluster", "--input", path_str(&missing)]).status.code(), Some(2));

    let ragged = dir.path().join("ragged.csv");
    std::fs::write(&ragged, "1,2\n3\n4,5\n").unwrap();
    let out = pfclust(&["cluster", "--input", path_str(&ragged)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains('2'));

    let text = dir.path().join("text.csv");
    std::fs::write(&text, "1,2\n3,x\n").unwrap();
    assert_eq!(pfclust(&["cluster", "--input", path_str(&text)]).status.code(), Some(2));

    let empty = dir.path().join("empty.toml");
    std::fs::write(&empty, "").unwrap();
    assert_eq!(pfclust(&["bench", "--manifest", path_str(&empty)]).status.code(), Some(2));

    let one = dir.path().join("one.csv");
    std::fs::write(&one, "1,2\n").unwrap();
    assert_eq!(pfclust(&["cluster", "--input", path_str(&one)]).status.code(), Some(2));
}

#[test]
fn identical_points_exit_3() {
    let dir = TempDir::new().unwrap();
    let same = dir.path().join("same.csv");
    std::fs::write(&same, "4,4\n4,4\n4,4\n4,4\n").unwrap();
    let out = pfclust(&["cluster", "--input", path_str(&same)]);
    assert_eq!(out.status.code(), Some(3));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["status"], "degenerate");
    assert_eq!(v["final_count"], 1);
    assert_eq!(pfclust(&["histogram", "--input", path_str(&same)]).status.code(), Some(3));
}

#[test]
fn histogram_counts_sum_to_n_squared() {
    let dir = TempDir::new().unwrap();
    let input = two_far_blobs(dir.path());
    let v = stdout_json(&pfclust(&["histogram", "--input", path_str(&input), "--label-col", "3"]));
    let bins = v["histogram"].as_array().unwrap();
    assert_eq!(bins.len(), 10);
    let total: u64 = bins.iter().map(|b| b["count"].as_u64().unwrap()).sum();
    assert_eq!(total, 900);
    // two far groups: most pairs sit in the top or bottom bin
    assert!(bins[9]["count"].as_u64().unwrap() + bins[0]["count"].as_u64().unwrap() >= 800);
}

#[test]
fn bench_is_byte_identical_and_counts_matches() {
    let dir = TempDir::new().unwrap();
    let manifest = synthetic_corpus(dir.path(), 10);
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let o = pfclust(&["bench", "--manifest", path_str(&manifest), "--output", path_str(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);

    let v: Value = serde_json::from_slice(&ta).unwrap();
    let rows = v["datasets"].as_array().unwrap();
    assert_eq!(rows.len(), 11);
    let skipped: Vec<&Value> = rows.iter().filter(|r| r["status"] == "skipped").collect();
    assert_eq!(skipped.len(), 1);
    let hand = rows.iter().filter(|r| r["exact_match"] == true).count();
    assert_eq!(v["matches"].as_u64().unwrap() as usize, hand);
    assert_eq!(v["evaluated"], 10);
    let acc = v["accuracy"].as_f64().unwrap();
    assert!((acc - 100.0 * hand as f64 / 10.0).abs() < 1e-6);
}

#[test]
fn sweep_single_bin_gives_one_row_per_dataset() {
    let dir = TempDir::new().unwrap();
    let manifest = synthetic_corpus(dir.path(), 3);
    let v = stdout_json(&pfclust(&["sweep-bins", "--manifest", path_str(&manifest), "--bin-range", "10"]));
    let curve = v["curve"].as_array().unwrap();
    assert_eq!(curve.len(), 1);
    assert_eq!(curve[0]["bins"], 10);

    let out = pfclust(&["sweep-bins", "--manifest", path_str(&manifest), "--bin-range", "2-6", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body[0], "bins,evaluated,matches,accuracy");
    assert_eq!(body.len(), 6);
}

#[test]
fn generate_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = pfclust(&["generate", "--clusters", "3", "--noise", "0.1", "--seed", "9", "--output", path_str(p)]);
        assert!(o.status.success());
    }
    let ta = std::fs::read_to_string(&a).unwrap();
    assert_eq!(ta, std::fs::read_to_string(&b).unwrap());
    assert_eq!(ta.lines().count(), 330);
    assert_eq!(ta.lines().filter(|l| l.ends_with(",0")).count(), 30);
}

#[test]
fn timings_are_opt_in() {
    let dir = TempDir::new().unwrap();
    let input = two_far_blobs(dir.path());
    let v = stdout_json(&pfclust(&["cluster", "--input", path_str(&input), "--label-col", "3", "--timings"]));
    assert!(v["timings"]["detect_ms"].is_number());
}
