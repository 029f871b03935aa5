use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cellproj::dataset::load_dataset;
use cellproj::features::{parse_records, FeatureVector};
use cellproj::image::Polarity;

const MINIMAL: &str = r#"
seed = 4
[dataset]
per_class = 12
[split]
train = 0.5
test = 0.5
[[feature]]
name = "cp"
params = "kh=4,kv=4"
[knn]
k = [3]
"#;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cellproj"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn glyph(dir: &Path) {
    let mut text = String::from("P1\n16 16\n");
    for r in 0..16 {
        let row: Vec<&str> = (0..16).map(|c| if (4..12).contains(&c) && r > 2 { "1" } else { "0" }).collect();
        text.push_str(&row.join(" "));
        text.push('\n');
    }
    fs::write(dir.join("glyph.pbm"), text).unwrap();
}

#[test]
fn extract_celled_projection_from_pbm() {
    let dir = tempfile::tempdir().unwrap();
    glyph(dir.path());
    let out = run(dir.path(), &["extract", "--feature", "cp", "--params", "kh=4,kv=4", "--in", "glyph.pbm", "--out", "v.txt"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let records = parse_records(&fs::read_to_string(dir.path().join("v.txt")).unwrap()).unwrap();
    assert_eq!(records.len(), 1);
    assert!(matches!(&records[0].vector, FeatureVector::Bits(b) if b.len() == 128));
}

#[test]
fn extract_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    glyph(dir.path());
    let unknown = run(dir.path(), &["extract", "--feature", "wavelet", "--in", "glyph.pbm", "--out", "v.txt"]);
    assert_eq!(code(&unknown), 2);
    assert!(!unknown.stderr.is_empty());
    let missing = run(dir.path(), &["extract", "--feature", "cp", "--in", "nope.pbm", "--out", "v.txt"]);
    assert_eq!(code(&missing), 3);
    let indivisible = run(dir.path(), &["extract", "--feature", "cp", "--params", "kh=3,kv=0", "--in", "glyph.pbm", "--out", "v.txt"]);
    assert_eq!(code(&indivisible), 4);
    let bad_flag = run(dir.path(), &["extract", "--feature", "cp", "--bogus", "--in", "glyph.pbm", "--out", "v.txt"]);
    assert_eq!(code(&bad_flag), 2);
    assert_eq!(code(&run(dir.path(), &[])), 2);
    assert!(!dir.path().join("v.txt").exists());
}

#[test]
fn grid_minimal_spec_resumes_from_cache() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("spec.toml"), MINIMAL).unwrap();
    let first = run(dir.path(), &["grid", "--spec", "spec.toml", "--out", "out"]);
    assert_eq!(code(&first), 0, "{}", String::from_utf8_lossy(&first.stderr));
    let csv = fs::read_to_string(dir.path().join("out/report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("cp,\"kh=4,kv=4\",knn,k=3,"));

    let second = run(dir.path(), &["grid", "--spec", "spec.toml", "--out", "out", "--jobs", "3"]);
    assert_eq!(code(&second), 0);
    assert!(String::from_utf8_lossy(&second.stderr).contains("(cached)"));
    assert_eq!(fs::read_to_string(dir.path().join("out/report.csv")).unwrap(), csv);

    // simulated interrupt: the cache lost its only entry
    let cache_dir = fs::read_dir(dir.path().join("out/cache")).unwrap().next().unwrap().unwrap().path();
    for entry in fs::read_dir(&cache_dir).unwrap() {
        fs::remove_file(entry.unwrap().path()).unwrap();
    }
    assert_eq!(code(&run(dir.path(), &["grid", "--spec", "spec.toml", "--out", "out"])), 0);
    assert_eq!(fs::read_to_string(dir.path().join("out/report.csv")).unwrap(), csv);

    let mut top: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    top.sort();
    assert_eq!(top, ["out", "spec.toml"]);
}

#[test]
fn grid_markdown_and_bad_specs() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("spec.toml"), MINIMAL).unwrap();
    let out = run(dir.path(), &["grid", "--spec", "spec.toml", "--out", "md", "--format", "md"]);
    assert_eq!(code(&out), 0);
    let md = fs::read_to_string(dir.path().join("md/report.md")).unwrap();
    assert!(md.starts_with("| Feature | Parameters | KNN k=3 |"));

    fs::write(dir.path().join("bad.toml"), "seed = [").unwrap();
    assert_eq!(code(&run(dir.path(), &["grid", "--spec", "bad.toml", "--out", "x"])), 2);
    fs::write(dir.path().join("nofeat.toml"), "[knn]\nk = [3]\n").unwrap();
    assert_eq!(code(&run(dir.path(), &["grid", "--spec", "nofeat.toml", "--out", "x"])), 2);
    assert_eq!(code(&run(dir.path(), &["grid", "--spec", "absent.toml", "--out", "x"])), 3);
}

#[test]
fn synth_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let empty = run(dir.path(), &["synth", "--per-class", "0", "--out", "empty"]);
    assert_eq!(code(&empty), 0);
    let data = load_dataset(dir.path().join("empty"), 128, Polarity::DarkForeground).unwrap();
    assert!(data.is_empty());

    for name in ["a.idx", "b.idx"] {
        assert_eq!(code(&run(dir.path(), &["synth", "--per-class", "5", "--seed", "9", "--out", name])), 0);
    }
    assert_eq!(fs::read(dir.path().join("a.idx")).unwrap(), fs::read(dir.path().join("b.idx")).unwrap());
    let data = load_dataset(dir.path().join("a.idx"), 128, Polarity::DarkForeground).unwrap();
    assert_eq!(data.len(), 50);
    assert_eq!(data.class_counts(), vec![5; 10]);
}

#[test]
fn eval_on_training_set_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(dir.path(), &["synth", "--per-class", "8", "--out", "train"])), 0);
    let out = run(
        dir.path(),
        &["eval", "--train", "train", "--test", "train", "--feature", "cp", "--params", "kh=4,kv=4", "--classifier", "knn", "--k", "1", "--save-model", "model.txt"],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("accuracy 100.00"));
    assert!(fs::read_to_string(dir.path().join("model.txt")).unwrap().starts_with("knn hamming k=1"));
}

#[test]
fn bench_reports_requested_runs() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(dir.path(), &["synth", "--per-class", "5", "--out", "d"])), 0);
    let out = run(dir.path(), &["bench", "--in", "d", "--reps", "3"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("reps: 3"));
    assert!(text.contains("packed hamming"));
    assert_eq!(code(&run(dir.path(), &["bench", "--in", "d", "--reps", "0"])), 2);
}
