use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use jsonschema::{Retrieve, Uri};
use serde_json::Value;

const SQRT_PI: f64 = 1.772_453_850_905_516;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn circuit(name: &str) -> PathBuf {
    root().join("circuits").join(name)
}

fn gkpsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gkpsim")).args(args).output().expect("binary runs")
}

fn run(args: &[&str]) -> (i32, String, String) {
    let o = gkpsim(args);
    (o.status.code().unwrap_or(-1), String::from_utf8(o.stdout).unwrap(), String::from_utf8(o.stderr).unwrap())
}

fn with_file(args: &[&str], name: &str) -> (i32, String, String) {
    let p = circuit(name);
    let mut v: Vec<&str> = args.to_vec();
    v.insert(1, p.to_str().unwrap());
    run(&v)
}

fn temp_circuit(tag: &str, text: &str) -> PathBuf {
    let p = std::env::temp_dir().join(format!("gkpsim-cli-test-{}-{tag}.gkp", std::process::id()));
    std::fs::write(&p, text).unwrap();
    p
}

struct SchemaDir;

impl Retrieve for SchemaDir {
    fn retrieve(&self, uri: &Uri<String>) -> Result<Value, Box<dyn std::error::Error + Send + Sync>> {
        let name = uri.path().as_str().rsplit('/').next().unwrap_or_default().to_string();
        let text = std::fs::read_to_string(root().join("docs/schemas").join(name))?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn assert_schema(schema: &str, v: &Value) {
    let text = std::fs::read_to_string(root().join("docs/schemas").join(schema)).unwrap();
    let s: Value = serde_json::from_str(&text).unwrap();
    let validator = jsonschema::options().with_retriever(SchemaDir).build(&s).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(v).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{schema}: {errors:?}\n{v:#}");
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap_or_else(|e| panic!("bad JSON ({e}): {s}"))
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn check_accepts_single_measurement() {
    let (code, out, _) = with_file(&["check"], "two_mode_single.gkp");
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["accepted"], true);
    assert_eq!(v["class"], "A");
    assert_schema("check.schema.json", &v);
}

#[test]
fn check_accepts_joint_measurement() {
    let (code, out, _) = with_file(&["check"], "two_mode_joint.gkp");
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["class"], "B");
    assert_schema("check.schema.json", &v);
}

#[test]
fn check_rejects_even_denominator() {
    let (code, out, err) = with_file(&["check"], "clifford_rejected.gkp");
    assert_eq!(code, 2);
    let v = json(&out);
    assert_eq!(v["accepted"], false);
    assert_eq!(v["class"], "none");
    assert!(v["reason"].as_str().unwrap().contains("even denominator"));
    assert!(err.contains("even denominator"));
    assert_schema("check.schema.json", &v);
}

#[test]
fn check_rejects_joint_with_bad_angle() {
    let p = temp_circuit("joint-bad", "modes 2\nR 1 cot 1/2\nSUM 1 2\nMEASURE 1 2\n");
    let (code, out, _) = run(&["check", p.to_str().unwrap()]);
    assert_eq!(code, 2);
    let v = json(&out);
    assert_eq!(v["accepted"], false);
    assert_schema("check.schema.json", &v);
}

#[test]
fn missing_file_and_bad_usage() {
    assert_eq!(run(&["check", "/nonexistent/circuit.gkp"]).0, 1);
    assert_eq!(run(&["frobnicate"]).0, 1);
    assert_eq!(run(&["sample"]).0, 1);
    assert_eq!(with_file(&["sample", "--count", "many"], "identity.gkp").0, 1);
    assert_eq!(run(&["--help"]).0, 0);
}

#[test]
fn parse_errors_carry_line_numbers() {
    let p = temp_circuit("parse", "modes 2\nF 1\nROT 1 cot 1/3\nMEASURE 1\n");
    let (code, _, err) = run(&["check", p.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn float_angles_need_opt_in() {
    let p = temp_circuit("rad", "modes 1\nR 1 rad 0.4636476090008061\nMEASURE 1\n");
    let path = p.to_str().unwrap();
    assert_eq!(run(&["check", path]).0, 2);
    // atan(1/2): cot = 2
    let (code, out, _) = run(&["check", path, "--allow-float"]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(json(&out)["per_mode"][0]["u"], 2);
}

#[test]
fn pdf_single() {
    let (code, out, _) = with_file(&["pdf"], "two_mode_single.gkp");
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["kind"], "comb1d");
    let sp: Vec<f64> = v["spacings"].as_array().unwrap().iter().map(f).collect();
    assert_eq!(sp, vec![2.0 * SQRT_PI, SQRT_PI]);
    assert_eq!(f(&v["offset"]), 0.0);
    assert_schema("comb1d.schema.json", &v);

    let v = json(&with_file(&["pdf"], "identity.gkp").1);
    assert_eq!(f(&v["spacings"][0]), 2.0 * SQRT_PI);
    assert_schema("comb1d.schema.json", &v);

    let v = json(&with_file(&["pdf"], "rotated_squeezed.gkp").1);
    assert_eq!(f(&v["offset"]), 0.25);
    assert_schema("comb1d.schema.json", &v);
}

#[test]
fn pdf_joint() {
    let (code, out, _) = with_file(&["pdf"], "two_mode_joint.gkp");
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["kind"], "combNd");
    let g: Vec<Vec<f64>> = v["matrix"].as_array().unwrap().iter().map(|r| r.as_array().unwrap().iter().map(f).collect()).collect();
    assert_eq!(g, vec![vec![SQRT_PI, 0.0], vec![SQRT_PI, 2.0 * SQRT_PI]]);
    assert_schema("combNd.schema.json", &v);
}

#[test]
fn pdf_rejected() {
    let (code, out, err) = with_file(&["pdf"], "clifford_rejected.gkp");
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.contains("even denominator"));
}

#[test]
fn json_numbers_round_trip() {
    let out = with_file(&["pdf"], "two_mode_single.gkp").1;
    // 17 significant digits
    assert!(out.contains("3.5449077018110322e+0"), "{out}");
}

#[test]
fn sample_lines_on_lattice() {
    let (code, out, _) = with_file(&["sample", "--count", "1000", "--seed", "3"], "two_mode_single.gkp");
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 1000);
    for l in lines {
        let x: f64 = l.parse().unwrap();
        let r = x / SQRT_PI;
        assert!((r - r.round()).abs() * SQRT_PI < 1e-10, "{x}");
    }
}

#[test]
fn sample_joint_and_determinism() {
    let a = with_file(&["sample", "--count", "200", "--seed", "7"], "two_mode_joint.gkp");
    let b = with_file(&["sample", "--count", "200", "--seed", "7"], "two_mode_joint.gkp");
    assert_eq!(a.0, 0);
    assert_eq!(a.1, b.1);
    for l in a.1.lines() {
        let x: Vec<f64> = l.split('\t').map(|t| t.parse().unwrap()).collect();
        assert_eq!(x.len(), 2);
        let d = (x[1] - x[0]) / (2.0 * SQRT_PI);
        assert!((d - d.round()).abs() < 1e-10);
    }
    let c = with_file(&["sample", "--count", "200", "--seed", "8"], "two_mode_joint.gkp");
    assert_ne!(a.1, c.1);
    let (code, out, _) = with_file(&["sample", "--count", "0"], "two_mode_joint.gkp");
    assert_eq!((code, out.as_str()), (0, ""));
    assert_eq!(with_file(&["sample", "--count", "5"], "clifford_rejected.gkp").0, 2);
}

#[test]
fn compare_fourier() {
    let (code, out, _) = with_file(&["compare", "--delta-gkp", "0.02"], "fourier.gkp");
    assert_eq!(code, 0, "{out}");
    let v = json(&out);
    assert!(f(&v["max_relative_error"]) < 0.02);
    assert_eq!(f(&v["analytic_spacing"]), SQRT_PI);
    assert_schema("compare.schema.json", &v);
}

#[test]
fn compare_identity() {
    let (code, out, _) = with_file(&["compare"], "identity.gkp");
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(f(&v["analytic_spacing"]), 2.0 * SQRT_PI);
    for g in v["numeric_gaps"].as_array().unwrap() {
        assert!((f(g) - 2.0 * SQRT_PI).abs() / (2.0 * SQRT_PI) < 0.02);
    }
    assert_schema("compare.schema.json", &v);
}

#[test]
fn compare_exit_codes() {
    let (code, _, err) = with_file(&["compare", "--delta-gkp", "0.02"], "two_mode_joint.gkp");
    assert_eq!(code, 1);
    assert!(err.contains("unsupported"));
    // two contributing modes
    let (code, _, err) = with_file(&["compare"], "two_mode_single.gkp");
    assert_eq!(code, 1);
    assert!(err.contains("unsupported"));
    assert_eq!(with_file(&["compare"], "clifford_rejected.gkp").0, 2);
    assert_eq!(with_file(&["compare", "--threshold", "0"], "fourier.gkp").0, 3);
    assert_eq!(with_file(&["compare", "--delta-gkp", "-1"], "fourier.gkp").0, 1);
}

#[test]
fn strict_dsp_flag() {
    // F 1; SUM 1 2 leaves an asymmetric mixing block
    assert_eq!(with_file(&["check"], "two_mode_joint.gkp").0, 0);
    assert_eq!(with_file(&["check", "--strict-dsp"], "two_mode_joint.gkp").0, 2);
}
