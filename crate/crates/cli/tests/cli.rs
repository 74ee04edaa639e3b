use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const UNIFORM: &str = r#"{"lambda":[0.5,0.0],"translations":[[1,0],[-1,0]],"weights":[0.5,0.5]}"#;
const COMPLEX: &str = r#"{"lambda":[0.5,0.5],"translations":[[1,0],[-1,0],[0,1]],"weights":[0.3,0.3,0.4]}"#;
const EXPANDING: &str = r#"{"lambda":[1.5,0.2],"translations":[[1,0],[-1,0]],"weights":[0.5,0.5]}"#;

fn write_spec(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fractalconv"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn invalid_lambda_exits_2_and_names_lambda() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(&dir, "bad.json", EXPANDING);
    let o = run(&dir.path().join("out"), &["validate", "--spec", spec.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("lambda"), "{}", stderr(&o));
}

#[test]
fn usage_error_exits_64() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["no-such-command"]);
    assert_eq!(o.status.code(), Some(64));
    let o = run(dir.path(), &["--help"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn delta_both_modes_agree() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(&dir, "c.json", COMPLEX);
    let out = dir.path().join("out");
    let o = run(&out, &["--format", "json", "delta", "--spec", spec.to_str().unwrap(), "--n", "8", "--mode", "both"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("delta.json")).unwrap()).unwrap();
    let values: Vec<f64> = rows
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["result"]["value"].as_f64().unwrap())
        .collect();
    assert_eq!(values.len(), 2);
    assert_eq!(values[0].to_bits(), values[1].to_bits());
}

#[test]
fn fourier_eval_matches_cosine_product() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(&dir, "u.json", UNIFORM);
    let out = dir.path().join("out");
    let o = run(&out, &["--format", "json", "fourier-eval", "--spec", spec.to_str().unwrap(), "--xi", "0.1", "0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("0.75682672"), "{}", stdout(&o));
    let samples: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("fourier.json")).unwrap()).unwrap();
    let re = samples[0]["value"][0].as_f64().unwrap();
    let x = 0.4 * std::f64::consts::PI;
    assert!((re - x.sin() / x).abs() < 1e-8, "{re}");
    assert!((re - 0.7568267).abs() < 1e-7, "{re}");
}

#[test]
fn manifest_lists_outputs_with_digests() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(&dir, "c.json", COMPLEX);
    let out = dir.path().join("out");
    let o = run(
        &out,
        &["--seed", "7", "render", "--spec", spec.to_str().unwrap(), "--points", "2000", "--resolution", "32"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "render");
    assert_eq!(manifest["seed"], 7);
    let files: Vec<&str> = manifest["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["file"].as_str().unwrap())
        .collect();
    assert_eq!(files, ["density.json", "density.pgm"]);
    for f in manifest["outputs"].as_array().unwrap() {
        assert_eq!(f["sha256"].as_str().unwrap().len(), 64);
    }
}

#[test]
fn render_is_reproducible_for_a_seed() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(&dir, "c.json", COMPLEX);
    let args = ["--seed", "3", "render", "--spec", spec.to_str().unwrap(), "--points", "5000", "--resolution", "32"];
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(run(&a, &args).status.success());
    assert!(run(&b, &args).status.success());
    assert_eq!(fs::read(a.join("density.pgm")).unwrap(), fs::read(b.join("density.pgm")).unwrap());
}

#[test]
fn pisot_check_recognises_cubic() {
    let dir = TempDir::new().unwrap();
    let o = run(&dir.path().join("out"), &["pisot-check", "--coeffs", "1", "0", "1", "-1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("ComplexPisot"));
    assert!(stdout(&o).contains("1.2106078"));
}

#[test]
fn ek_seq_rejects_theta_inside_unit_disk() {
    let dir = TempDir::new().unwrap();
    let o = run(&dir.path().join("out"), &["ek-seq", "--theta", "0.5", "0.5", "--t", "1", "0", "--n", "10"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}
