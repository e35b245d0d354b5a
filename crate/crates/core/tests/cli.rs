use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn catalyq(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_catalyq"))
        .args(args)
        .current_dir(dir)
        .env("CATALYQ_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn diag(p: &[f64]) -> Value {
    let n = p.len();
    let rows: Vec<Vec<[f64; 2]>> =
        (0..n).map(|i| (0..n).map(|j| [if i == j { p[i] } else { 0.0 }, 0.0]).collect()).collect();
    json!({ "dims": [n], "matrix": rows })
}

fn write(dir: &Path, name: &str, v: &Value) {
    std::fs::write(dir.join(name), serde_json::to_string(v).unwrap()).unwrap();
}

fn read(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn hamiltonian() -> Value {
    diag(&[0.0, 3f64.ln()])
}

#[test]
fn toy_example_passes_and_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = catalyq(dir.path(), &["toy-example", "--out", "toy.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("PASS"));
    let r = read(dir.path(), "toy.json");
    assert_eq!(r["all_pass"], true);
    assert_eq!(r["q_exact"], "25/65536");
}

#[test]
fn appendix_d_agrees() {
    let dir = tempfile::tempdir().unwrap();
    let o = catalyq(dir.path(), &["appendix-d"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn bad_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = catalyq(dir.path(), &["divergence", "--kind", "kl", "--state-a", "missing.json", "--state-b", "b.json"]);
    assert_eq!(o.status.code(), Some(2));

    write(dir.path(), "bad.json", &diag(&[0.7, 0.7]));
    write(dir.path(), "ok.json", &diag(&[0.5, 0.5]));
    let o = catalyq(dir.path(), &["divergence", "--kind", "kl", "--state-a", "bad.json", "--state-b", "ok.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("trace"), "{}", stderr(&o));

    let o = catalyq(dir.path(), &["appendix-d", "--tol", "psd=-1"]);
    assert_eq!(o.status.code(), Some(2));

    write(dir.path(), "p.json", &json!({ "rho": diag(&[0.5, 0.5]), "colour": 3 }));
    let o = catalyq(dir.path(), &["convert", "theorem1", "--params", "p.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("colour"), "{}", stderr(&o));

    let o = catalyq(dir.path(), &["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn uphill_conversion_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let p = json!({
        "rho": diag(&[0.75, 0.25]),
        "rho_p": diag(&[0.015, 0.985]),
        "hamiltonian": hamiltonian(),
        "eps": 0.01,
        "delta": 0.06,
    });
    write(dir.path(), "p.json", &p);
    let o = catalyq(dir.path(), &["convert", "theorem1", "--params", "p.json"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn downhill_conversion_reports_a_readable_output_state() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "rho.json", &diag(&[0.015, 0.985]));
    let p = json!({
        "rho": "rho.json",
        "rho_p": diag(&[0.6, 0.4]),
        "hamiltonian": hamiltonian(),
        "eps": 0.01,
        "delta": 0.06,
    });
    write(dir.path(), "p.json", &p);
    let o = catalyq(dir.path(), &["convert", "theorem1", "--params", "p.json", "--out", "r.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = read(dir.path(), "r.json");
    assert_eq!(r["passed"], true);
    write(dir.path(), "out.json", &r["output_state"]);
    write(dir.path(), "target.json", &p["rho_p"]);
    let o = catalyq(
        dir.path(),
        &["divergence", "--kind", "kl", "--state-a", "out.json", "--state-b", "target.json", "--out", "d.json"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(read(dir.path(), "d.json")["value"].as_f64().unwrap() < 0.01);
}

#[test]
fn constructed_channel_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let (sigma, kappa) = (diag(&[0.015, 0.985]), diag(&[0.75, 0.25]));
    let (sigma_p, kappa_p) = (diag(&[0.2, 0.8]), diag(&[0.5, 0.5]));
    write(dir.path(), "p.json", &json!({ "sigma": sigma, "kappa": kappa, "sigma_p": sigma_p, "kappa_p": kappa_p, "eps": 0.01 }));
    let o = catalyq(dir.path(), &["construct", "lemma1", "--params", "p.json", "--out", "c.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    write(dir.path(), "g.json", &kappa);
    write(dir.path(), "gp.json", &kappa_p);
    let o = catalyq(dir.path(), &["verify", "--channel", "c.json", "--gibbs", "g.json", "--gibbs-out", "gp.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    // Against the wrong output Gibbs state the fixed point fails.
    let o = catalyq(dir.path(), &["verify", "--channel", "c.json", "--gibbs", "g.json"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn stein_scan_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = catalyq(dir.path(), &["stein-scan", "--nmax", "5", "--out", "s.csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,rate,gap_to_kl"));
    assert_eq!(lines.count(), 5);
}

#[test]
fn small_campaign_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["campaign", "--seed", "3", "--count", "4", "--out"];
    let a = catalyq(dir.path(), &[&args[..], &["a.json"]].concat());
    let b = catalyq(dir.path(), &[&args[..], &["b.json"]].concat());
    assert!(matches!(a.status.code(), Some(0 | 1)), "{}", stderr(&a));
    assert_eq!(a.status.code(), b.status.code());
    let (ra, rb) = (read(dir.path(), "a.json"), read(dir.path(), "b.json"));
    assert_eq!(ra, rb);
    assert_eq!(ra["instances"].as_array().unwrap().len(), 8);
}
