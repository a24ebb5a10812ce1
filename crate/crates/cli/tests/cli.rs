//! End-to-end runs of the binary: smoke, exit codes, determinism and the
//! golden harness.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_specdegen"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect()
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../golden")
}

#[test]
fn airy_zeros_smoke() {
    let o = run(&["airy", "zeros", "--n", "3", "--kind", "dirichlet"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("# config-sha256 "));
    assert!(text.lines().any(|l| l == "index,zero"));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 3);
    let z1: f64 = rows[0].split(',').nth(1).unwrap().parse().unwrap();
    assert!((z1 + 2.338_107_410_459_767).abs() < 1e-12);
    // 17 significant digits
    assert_eq!(rows[0].split(',').nth(1).unwrap(), "-2.3381074104597839e0");
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let o = run(&["airy", "zeros", "--n", "3", "--frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage"));
    let o = run(&["nosuchcommand"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn validation_and_refusal_codes() {
    let o = run(&["halfline", "sweep", "--t-grid", "0.1,0.2", "--k", "1"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("decreasing"));
    let o = run(&[
        "domain", "triangle", "--t", "0.05", "--n", "3", "--h", "0.01",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("0.00625"), "{}", stderr(&o));
    let o = bin()
        .env("SPECDEGEN_THREADS", "zero")
        .args(["airy", "zeros", "--n", "1"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn halfline_solve_and_eigenfunction_dump() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "halfline",
        "solve",
        "--profile",
        "exp2",
        "--mu",
        "pi2",
        "--t",
        "0.1",
        "--bc",
        "dirichlet",
        "--k",
        "2",
        "--emit",
        "csv",
        "--dump-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l == "t,mu,k,lambda,residual"));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 2);
    // t²·j²_{10π,1}
    let lambda: f64 = rows[0].split(',').nth(3).unwrap().parse().unwrap();
    assert!((lambda / 14.136_506_456_555_805 - 1.0).abs() < 1e-6);
    let w = std::fs::read_to_string(dir.path().join("eigenfunction_k2.csv")).unwrap();
    assert!(w.lines().any(|l| l == "x,w"));
    assert!(data_rows(&w).len() > 100);
}

#[test]
fn product_and_cylinder() {
    let o = run(&[
        "product",
        "spectrum",
        "--profile",
        "exp2",
        "--b",
        "dirichlet-interval:L=1",
        "--t",
        "0.1",
        "--lambda-max",
        "25",
        "--emit",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l == "lambda,ell,k"));
    let rows = data_rows(&text);
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.split(',').nth(1) == Some("1")));
    let o = run(&["product", "cylinder", "--t", "1", "--n", "4"]);
    let rows: Vec<String> = data_rows(&stdout(&o))
        .iter()
        .map(|s| s.to_string())
        .collect();
    assert_eq!(rows.len(), 4);
    // π²(1 + 1) from (k, ℓ) = (1, 1), counted twice
    assert!(rows[1].starts_with("2,1.9739208802178716e1,2,"), "{rows:?}");
}

#[test]
fn quasimode_campaign_json() {
    let o = run(&[
        "forms",
        "quasimode-campaign",
        "--n",
        "6",
        "--trials",
        "200",
        "--seed",
        "42",
        "--emit",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["payload"]["report"]["total_violations"], 0);
    assert_eq!(v["payload"]["report"]["trials"], 200);
    assert!(v["config_sha256"].as_str().unwrap().len() == 64);
    assert_eq!(v["provenance"][0]["module"], "forms");
}

#[test]
fn forms_track_reads_a_family_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("family.txt");
    // A(t) = diag(t, 1 − t): the analytic branches cross at t = 1/2
    std::fs::write(
        &path,
        "dim=2 t=0\n0,0\n0,1\n1,0\n0,1\ndim=2 t=1\n1,0\n0,0\n1,0\n0,1\n",
    )
    .unwrap();
    let o = run(&[
        "forms",
        "track",
        "--family",
        path.to_str().unwrap(),
        "--t-grid",
        "0.1,0.4,0.6,0.9",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let first: Vec<f64> = data_rows(&text)
        .iter()
        .filter(|r| r.starts_with("0,"))
        .map(|r| r.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(first.len(), 4);
    assert!(first.windows(2).all(|w| w[1] > w[0]), "{first:?}");
}

#[test]
fn domain_compare_reports_hausdorff_per_t() {
    let o = run(&[
        "domain", "compare", "--t-grid", "0.2,0.1", "--n", "5", "--emit", "json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rows = v["payload"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for (r, t) in rows.iter().zip([0.2, 0.1]) {
        assert_eq!(r["t"], t);
        assert!(r["hausdorff"].as_f64().unwrap() > 0.0);
    }
    let o = run(&["domain", "sector", "--t", "0.1", "--n", "3"]);
    assert_eq!(data_rows(&stdout(&o)).len(), 3);
}

#[test]
fn triangle_mesh_dump() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "domain",
        "triangle",
        "--t",
        "0.2",
        "--n",
        "2",
        "--h",
        "0.025",
        "--mesh-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = std::fs::read_to_string(dir.path().join("vertices.csv")).unwrap();
    let e = std::fs::read_to_string(dir.path().join("elements.csv")).unwrap();
    assert!(v.contains("index,x,y,boundary") && e.contains("index,a,b,c"));
    // 40 columns of 9 nodes plus the apex; 8 apex cells plus 2·39·8
    assert_eq!(data_rows(&v).len(), 1 + 40 * 9);
    assert_eq!(data_rows(&e).len(), 8 + 2 * 39 * 8);
}

const SUPERSEP: &str = r#"
kind = "superseparation"
profile = "exp"
mu = [1.0]
t_grid = [0.3, 0.15]
k = [1, 2]
[output]
csv = "out/supersep.csv"
json = "out/supersep.json"
"#;

#[test]
fn campaign_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("supersep.toml");
    std::fs::write(&cfg, SUPERSEP).unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "2"] {
        let o = bin()
            .env("SPECDEGEN_THREADS", threads)
            .args(["campaign", "--config", cfg.to_str().unwrap()])
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let csv = std::fs::read(dir.path().join("out/supersep.csv")).unwrap();
        let json = std::fs::read(dir.path().join("out/supersep.json")).unwrap();
        outputs.push((csv, json));
    }
    assert_eq!(outputs[0], outputs[1]);
    let csv = String::from_utf8(outputs[0].0.clone()).unwrap();
    assert_eq!(data_rows(&csv).len(), 4);
    assert!(csv.lines().any(|l| l.starts_with("mu,k,t,lambda_k,")));

    std::fs::write(&cfg, SUPERSEP.replace("[0.3, 0.15]", "[0.3, 0.15, 0.15]")).unwrap();
    let o = run(&["campaign", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn randomized_campaign_needs_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("q.toml");
    std::fs::write(&cfg, "kind = \"quasimode\"\nn = 4\ntrials = 10\n").unwrap();
    let o = run(&["campaign", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("seed"));
}

#[test]
fn golden_file_passes() {
    let cfg = golden_dir().join("bessel_sweep.toml");
    let o = run(&["golden-check", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("PASS"));
}

/// Copy of the golden file with the third data row's lambda scaled by 1 + 1e-3.
fn perturbed_golden(dir: &Path) -> PathBuf {
    let text = std::fs::read_to_string(golden_dir().join("bessel_sweep.csv")).unwrap();
    let mut seen = 0;
    let lines: Vec<String> = text
        .lines()
        .map(|l| {
            if l.starts_with('#') || l.starts_with("t,") {
                return l.to_string();
            }
            seen += 1;
            if seen != 3 {
                return l.to_string();
            }
            let mut f: Vec<String> = l.split(',').map(String::from).collect();
            let v: f64 = f[3].parse().unwrap();
            f[3] = format!("{:.16e}", v * (1.0 + 1e-3));
            f.join(",")
        })
        .collect();
    let path = dir.join("perturbed.csv");
    std::fs::write(&path, lines.join("\n")).unwrap();
    path
}

#[test]
fn perturbed_golden_fails_naming_the_row() {
    let dir = tempfile::tempdir().unwrap();
    let golden = perturbed_golden(dir.path());
    let cfg = golden_dir().join("bessel_sweep.toml");
    let o = run(&[
        "golden-check",
        "--config",
        cfg.to_str().unwrap(),
        "--golden",
        golden.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(
        err.contains("row 3 [t=0.5, mu=9.8696044010893586, k=3]: field `lambda`"),
        "{err}"
    );
    assert!(err.contains("1 mismatches"), "{err}");
}

#[test]
fn tolerance_override_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let golden = perturbed_golden(dir.path());
    let cfg = golden_dir().join("bessel_sweep.toml");
    let args = [
        "golden-check",
        "--config",
        cfg.to_str().unwrap(),
        "--golden",
        golden.to_str().unwrap(),
    ];
    let o = run(&[&args[..], &["--tol", "lambda=2e-3"]].concat());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = run(&[&args[..], &["--tol", "lambda=5e-4"]].concat());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn missing_golden_file_explains_how_to_generate_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = golden_dir().join("bessel_sweep.toml");
    let missing = dir.path().join("absent.csv");
    let o = run(&[
        "golden-check",
        "--config",
        cfg.to_str().unwrap(),
        "--golden",
        missing.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(
        err.contains("missing") && err.contains("python3 golden/bessel_oracle.py"),
        "{err}"
    );
}
