use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ortho-block"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, value: &Value) -> String {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string(value).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

fn real_parts(poly: &Value) -> Vec<f64> {
    poly.as_array().unwrap().iter().map(|c| c[0].as_f64().unwrap()).collect()
}

#[test]
fn decompose_cubic_example() {
    let out = run(&["decompose", "--h", "[0,0,0,1]", "--p", "[1,2,3,4,5,6]"]);
    let v = stdout_json(&out);
    let parts: Vec<Vec<f64>> = v["parts"].as_array().unwrap().iter().map(real_parts).collect();
    assert_eq!(parts, vec![vec![1.0, 4.0], vec![2.0, 5.0], vec![3.0, 6.0]]);
}

#[test]
fn decompose_and_reconstruct_read_each_other() {
    let dir = tempfile::tempdir().unwrap();
    let p = json!([0.5, [-1.0, 0.25], 2.0, 0.0, 1.5, -0.75, 3.0]);
    let first = stdout_json(&run(&["decompose", "--h", "[-1,0,1]", "--p", &p.to_string()]));
    let decomposed = write(dir.path(), "d.json", &first);
    let composed = stdout_json(&run(&["reconstruct", "--input", &decomposed]));
    let composed_path = write(dir.path(), "c.json", &composed);
    let again = stdout_json(&run(&["decompose", "--input", &composed_path]));
    assert_eq!(first, again);
    let back: Vec<Value> = composed["p"].as_array().unwrap().clone();
    assert_eq!(back[1], json!([-1.0, 0.25]));
    assert_eq!(back.len(), 7);
}

fn chebyshev_system(n_terms: usize) -> Value {
    // N = 1, h = x: the Chebyshev three-term recurrence
    let mut a = vec![0.5f64; n_terms];
    a[0] = 0.0;
    if n_terms > 1 {
        a[1] = std::f64::consts::FRAC_1_SQRT_2;
    }
    json!({
        "N": 1,
        "h": [0.0, 1.0],
        "c0": vec![0.0; n_terms],
        "c": [a.iter().map(|&x| [x, 0.0]).collect::<Vec<_>>()],
        "initial": [[1.0]],
    })
}

#[test]
fn block_jacobi_json_and_banded_csv() {
    let sys = chebyshev_system(6).to_string();
    let blocks = stdout_json(&run(&["block-jacobi", "--sys", &sys, "--size", "4"]));
    assert_eq!(blocks["N"], 1);
    assert_eq!(blocks["E"].as_array().unwrap().len(), 4);
    assert_eq!(blocks["D"][0][0][0][0].as_f64().unwrap(), std::f64::consts::FRAC_1_SQRT_2);

    let out = run(&["block-jacobi", "--sys", &sys, "--size", "4", "--banded"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("row,col,re,im"));
    let entries: Vec<Vec<String>> = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(entries.len(), 4 + 2 * 3);
    let value = |r: &str, c: &str| -> f64 {
        entries.iter().find(|e| e[0] == r && e[1] == c).unwrap()[2].parse().unwrap()
    };
    assert_eq!(value("0", "1"), value("1", "0"));
    assert_eq!(value("2", "3"), 0.5);
}

#[test]
fn matrixify_reports_small_residual() {
    let sys = chebyshev_system(12).to_string();
    let v = stdout_json(&run(&["matrixify", "--sys", &sys, "--count", "10"]));
    assert_eq!(v["family"].as_array().unwrap().len(), 10);
    assert!(v["residual"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn normalize_swaps_antidiagonal_block() {
    let (o, i) = ([0.0, 0.0], [1.0, 0.0]);
    let input = json!({
        "A": [[[o, i], [i, o]]],
        "B": [[[i, o], [o, [2.0, 0.0]]], [[o, o], [o, o]]],
    });
    let v = stdout_json(&run(&["normalize", "--blocks", &input.to_string()]));
    for r in 0..2 {
        for c in 0..2 {
            let want = if r == c { 1.0 } else { 0.0 };
            let got = &v["D"][0][r][c];
            assert!((got[0].as_f64().unwrap() - want).abs() < 1e-12 && got[1].as_f64().unwrap().abs() < 1e-12);
        }
    }
    let u1 = &v["U"][1];
    assert!((u1[0][1][0].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((u1[1][0][0].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

fn sobolev_spec() -> Value {
    let a: Vec<f64> = std::iter::once(std::f64::consts::FRAC_1_SQRT_2).chain([0.5; 58]).collect();
    json!({
        "measure": {"recurrence": {"a": a, "b": vec![0.0; 60]}},
        "derivative_terms": [{"c": 0.0, "orders": {"1": 1.0}}],
    })
}

#[test]
fn sobolev_output_verifies_and_perturbation_fails() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "spec.json", &sobolev_spec());
    let out = stdout_json(&run(&["sobolev", "--spec", &spec, "--count", "16"]));
    assert_eq!(out["N"], 2);
    assert_eq!(out["L"], json!([[0.0, 0.0], [0.0, 1.0]]));
    let family = write(dir.path(), "family.json", &out);
    let measure = write(dir.path(), "measure.json", &out["measure"]);
    let h = out["h"].to_string();
    let l = out["L"].to_string();

    let ok = run(&["verify", "--family", &family, "--measure", &measure, "--h", &h, "--L", &l]);
    let verdict = stdout_json(&ok);
    assert!(verdict["pass"].as_bool().unwrap());
    assert_eq!(verdict["count"], 8);

    let mut bad = out.clone();
    let entry = &mut bad["family"][1]["coeffs"][0][0][0][0];
    *entry = json!(entry.as_f64().unwrap() + 1e-2);
    let bad_family = write(dir.path(), "bad.json", &bad);
    let fail = run(&["verify", "--family", &bad_family, "--measure", &measure, "--h", &h, "--L", &l]);
    assert_eq!(fail.status.code(), Some(1));
    let verdict: Value = serde_json::from_slice(&fail.stdout).unwrap();
    assert!(verdict["residual"].as_f64().unwrap() >= 1e-3);
    assert!(String::from_utf8_lossy(&fail.stderr).contains("residual"));
}

#[test]
fn sobolev_recurrence_csv() {
    let spec = sobolev_spec().to_string();
    let out = run(&["sobolev", "--spec", &spec, "--count", "12", "--extract-recurrence", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "n,k,re,im");
    assert_eq!(rows.len(), 1 + 12 * 3);
    // c_{n,1} vanishes for the even weight and even h
    for row in rows.iter().skip(1).filter(|r| r.split(',').nth(1) == Some("1")) {
        let re: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
        assert!(re.abs() < 1e-12);
    }
}

#[test]
fn krein_csv_is_independent_of_thread_count() {
    let mu = json!({"support": (1..=20).flat_map(|k| {
        let x = 1.0 - 1.0 / (k as f64 + 1.0);
        let w = 0.5f64.powi(k);
        [[-x, w], [x, w]]
    }).collect::<Vec<_>>()});
    let args = ["krein", "--measure", &mu.to_string(), "--h", "[-1,0,1]", "--sizes", "10,20,40", "--format", "csv"];
    let one = bin().args(args).env("ORTHO_BLOCK_THREADS", "1").output().unwrap();
    let four = bin().args(args).env("ORTHO_BLOCK_THREADS", "4").output().unwrap();
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
    let text = String::from_utf8(one.stdout).unwrap();
    assert!(text.starts_with("size,near_fraction,decay_head,decay_tail\n10,"));
    assert_eq!(text.lines().filter(|l| l.starts_with("40,")).count(), 1 + 40);
}

#[test]
fn fixed_seed_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for i in 0..2 {
        let path = dir.path().join(format!("run{i}.txt"));
        let status = bin()
            .args(["demo", "sobolev-legendre", "--seed", "7", "--out", path.to_str().unwrap()])
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(fs::read(path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert!(String::from_utf8_lossy(&outputs[0]).contains("seed 7"));
}

#[test]
fn bavinck_demo_echoes_l() {
    let out = run(&["demo", "bavinck-difference"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("    [0, 0]\n    [0, 1]\n"));
}

#[test]
fn input_errors_exit_with_two() {
    assert_eq!(run(&["decompose", "--h", "[0,0,1", "--p", "[1]"]).status.code(), Some(2));
    assert_eq!(run(&["decompose", "--h", "/no/such/file", "--p", "[1]"]).status.code(), Some(2));
    assert_eq!(run(&["decompose", "--h", "[5]", "--p", "[1]"]).status.code(), Some(2));
    assert_eq!(run(&["demo", "bavinck-difference", "--tol", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["decompose", "--h", "[0,1]", "--p", "[1]", "--format", "csv"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    let odd = chebyshev_system(5).to_string();
    let sys_with_n2 = odd.replace("\"N\":1", "\"N\":2");
    assert_eq!(run(&["block-jacobi", "--sys", &sys_with_n2, "--size", "4"]).status.code(), Some(2));
}
