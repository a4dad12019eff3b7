use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qudit::io;
use qudit::{ComplexMatrix, QuditSystem};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

fn qudit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qudit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn value(out: &Output, key: &str) -> String {
    let prefix = format!("{key}=");
    stdout(out)
        .lines()
        .find_map(|l| l.strip_prefix(&prefix).map(str::to_owned))
        .unwrap_or_else(|| panic!("no {key} in output:\n{}", stdout(out)))
}

fn num(out: &Output, key: &str) -> f64 {
    value(out, key).parse().unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_unitary(dir: &TempDir, name: &str, d: usize, n: usize, u: &ComplexMatrix) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, io::unitary_to_json(QuditSystem::new(d, n).unwrap(), u).unwrap()).unwrap();
    path
}

fn random_9x9(dir: &TempDir) -> PathBuf {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    write_unitary(dir, "u.json", 3, 2, &ComplexMatrix::random_unitary(9, &mut rng))
}

#[test]
fn identity_gives_empty_circuit() {
    let dir = TempDir::new().unwrap();
    let u = write_unitary(&dir, "id.json", 3, 2, &ComplexMatrix::identity(9));
    let circ = dir.path().join("c.json");
    let out = qudit(&["decompose", path_str(&u), "--out", path_str(&circ)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(value(&out, "gates"), "0");
    assert_eq!(num(&out, "max_deviation"), 0.0);
    let circuit = io::parse_circuit(&fs::read_to_string(&circ).unwrap()).unwrap();
    assert!(circuit.gates().is_empty());
}

#[test]
fn random_unitary_decomposes_and_verifies() {
    let dir = TempDir::new().unwrap();
    let u = random_9x9(&dir);
    let circ = dir.path().join("c.json");
    let out = qudit(&["decompose", path_str(&u), "--out", path_str(&circ)]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(num(&out, "max_deviation") < 1e-8);

    let ok = qudit(&["verify", path_str(&u), path_str(&circ)]);
    assert_eq!(ok.status.code(), Some(0));

    let strict = qudit(&["verify", path_str(&u), path_str(&circ), "--tol", "1e-15"]);
    assert_eq!(strict.status.code(), Some(3));
    assert_eq!(value(&strict, "passed"), "false");
}

#[test]
fn deleting_a_gate_fails_verification() {
    let dir = TempDir::new().unwrap();
    let u = random_9x9(&dir);
    let circ = dir.path().join("c.json");
    assert!(qudit(&["decompose", path_str(&u), "--out", path_str(&circ)]).status.success());

    let mut doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&circ).unwrap()).unwrap();
    let gates = doc["gates"].as_array_mut().unwrap();
    gates.remove(gates.len() / 2);
    let cut = dir.path().join("cut.json");
    fs::write(&cut, doc.to_string()).unwrap();

    let out = qudit(&["verify", path_str(&u), path_str(&cut)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(num(&out, "max_deviation") > 1e-8);
}

#[test]
fn malformed_input_exits_2_without_output() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"d\": 3, \"n\": 1, \"matrix\": [[1, 0]]").unwrap();
    let circ = dir.path().join("c.json");
    let out = qudit(&["decompose", path_str(&bad), "--out", path_str(&circ)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!circ.exists());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn error_classes_have_distinct_codes() {
    let dir = TempDir::new().unwrap();
    let circ = dir.path().join("c.json");

    let mut skew = ComplexMatrix::identity(3);
    skew[(0, 1)] = 0.5.into();
    let u = write_unitary(&dir, "skew.json", 3, 1, &skew);
    assert_eq!(qudit(&["decompose", path_str(&u), "--out", path_str(&circ)]).status.code(), Some(3));

    let u = write_unitary(&dir, "q.json", 2, 3, &ComplexMatrix::identity(8));
    assert_eq!(qudit(&["decompose", path_str(&u), "--out", path_str(&circ)]).status.code(), Some(4));

    let u = write_unitary(&dir, "id9.json", 3, 2, &ComplexMatrix::identity(9));
    let out = qudit(&["decompose", path_str(&u), "--out", path_str(&circ), "--d", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = qudit(&["decompose", path_str(&u), "--out", path_str(&circ), "--tol", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_rejects_dimension_mismatch() {
    let dir = TempDir::new().unwrap();
    let u3 = write_unitary(&dir, "u3.json", 3, 1, &ComplexMatrix::identity(3));
    let u9 = write_unitary(&dir, "u9.json", 3, 2, &ComplexMatrix::identity(9));
    let circ = dir.path().join("c.json");
    assert!(qudit(&["decompose", path_str(&u3), "--out", path_str(&circ)]).status.success());
    assert_eq!(qudit(&["verify", path_str(&u9), path_str(&circ)]).status.code(), Some(2));
}

#[test]
fn estimate_rows() {
    let out = qudit(&["estimate", "4096", "--d", "2,4,8"]);
    assert!(out.status.success());
    let rows: Vec<String> = stdout(&out).lines().map(str::to_owned).collect();
    assert_eq!(rows.len(), 3);
    let field = |row: &str, key: &str| -> f64 {
        row.split_whitespace()
            .find_map(|kv| kv.strip_prefix(&format!("{key}=")))
            .unwrap()
            .parse()
            .unwrap()
    };
    assert_eq!(field(&rows[0], "time_ratio"), 1.0);
    assert_eq!(field(&rows[1], "time_ratio"), 4.0);
    assert_eq!(field(&rows[2], "n"), 4.0);
    assert_eq!(field(&rows[2], "n2"), 12.0);
}

/// Writes the coefficients scaled to unit norm.
fn coeff_file(dir: &TempDir, name: &str, coeffs: &[[f64; 2]]) -> PathBuf {
    let norm = coeffs.iter().map(|[re, im]| re * re + im * im).sum::<f64>().sqrt();
    let scaled: Vec<[f64; 2]> = coeffs.iter().map(|[re, im]| [re / norm, im / norm]).collect();
    let path = dir.path().join(name);
    fs::write(&path, serde_json::json!({ "coefficients": scaled }).to_string()).unwrap();
    path
}

#[test]
fn ternary_pulse_uses_closed_form() {
    let dir = TempDir::new().unwrap();
    let c = coeff_file(&dir, "c.json", &[[0.5, 0.1], [0.3, -0.6], [0.2, 0.4]]);
    let p = dir.path().join("p.json");
    let out = qudit(&["pulse", "--coeffs", path_str(&c), "--out", path_str(&p)]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert_eq!(value(&out, "method"), "closed_form");
    assert!(num(&out, "infidelity") < 1e-9);
    let program = io::parse_pulse_program(&fs::read_to_string(&p).unwrap()).unwrap();
    assert_eq!(program.d, 3);
    assert!(program.residual.unwrap() < 1e-9);
}

#[test]
fn five_level_pulse_uses_optimizer() {
    let dir = TempDir::new().unwrap();
    let c = coeff_file(&dir, "c.json", &[[0.3, 0.2], [-0.4, 0.1], [0.2, 0.5], [0.1, -0.3], [0.4, 0.2]]);
    let p = dir.path().join("p.json");
    let out = qudit(&["pulse", "--coeffs", path_str(&c), "--out", path_str(&p), "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert_eq!(value(&out, "method"), "optimizer");
    assert!(num(&out, "infidelity") < 1e-6);
}

#[test]
fn unreachable_threshold_exits_5_with_best_effort_file() {
    let dir = TempDir::new().unwrap();
    let c = coeff_file(&dir, "c.json", &[[0.3, 0.2], [-0.4, 0.1], [0.2, 0.5], [0.1, -0.3], [0.4, 0.2]]);
    let p = dir.path().join("p.json");
    let out = qudit(&["pulse", "--coeffs", path_str(&c), "--out", path_str(&p), "--tol", "1e-300"]);
    assert_eq!(out.status.code(), Some(5));
    let program = io::parse_pulse_program(&fs::read_to_string(&p).unwrap()).unwrap();
    assert_eq!(program.residual, Some(num(&out, "infidelity")));
}

#[test]
fn phase_gate_pulse_finds_detuning() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("p.json");
    let out = qudit(&["pulse", "--gate", "X3(pi/2)", "--out", path_str(&p)]);
    assert_eq!(out.status.code(), Some(0));
    // phase = pi (1 - x / sqrt(4 + x^2)) = pi/2  at  x = 2/sqrt(3)
    assert!((num(&out, "detuning") - 2.0 / 3f64.sqrt()).abs() < 1e-12);
    assert!(num(&out, "phase_error").abs() < 1e-12);
}

#[test]
fn controlled_pulse_reports_leakage() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("p.json");
    let out = qudit(&["pulse", "--gate", "X3(pi)", "--controlled", "--out", path_str(&p)]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(num(&out, "max_deviation") < 1e-8);
    assert!(num(&out, "leakage") < 1e-10);
}

#[test]
fn tiny_budget_is_rejected() {
    let dir = TempDir::new().unwrap();
    let c = coeff_file(&dir, "c.json", &[[0.5, 0.0], [0.5, 0.0], [0.5, 0.0], [0.5, 0.0]]);
    let p = dir.path().join("p.json");
    let out = qudit(&["pulse", "--coeffs", path_str(&c), "--out", path_str(&p), "--budget", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let u = random_9x9(&dir);
    let c = coeff_file(&dir, "c.json", &[[0.3, 0.2], [-0.4, 0.1], [0.2, 0.5], [0.1, -0.3]]);
    let run = |tag: &str| {
        let circ = dir.path().join(format!("c{tag}.json"));
        let pulse = dir.path().join(format!("p{tag}.json"));
        let a = qudit(&["decompose", path_str(&u), "--out", path_str(&circ)]);
        let b = qudit(&["pulse", "--coeffs", path_str(&c), "--out", path_str(&pulse), "--seed", "7"]);
        (a.stdout, b.stdout, fs::read(circ).unwrap(), fs::read(pulse).unwrap())
    };
    assert_eq!(run("1"), run("2"));
}
