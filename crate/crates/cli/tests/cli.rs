use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use robust_fva::market::{deterministic_profile, SimulationConfig};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_robust-fva"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn json(text: &str) -> serde_json::Value {
    serde_json::from_str(text).unwrap()
}

#[test]
fn smoke_config_writes_single_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    ok(&["simulate", "--config", config("smoke.toml").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    for kind in ["fca", "fba", "fva"] {
        let text = fs::read_to_string(out.join(format!("{kind}_samples.csv"))).unwrap();
        assert_eq!(text.lines().count(), 2, "{kind}");
        assert!(text.starts_with("path_id,z_1,"));
    }
    let profile = fs::read_to_string(out.join("profile.csv")).unwrap();
    assert!(profile.starts_with("time,ee,nee,pfe,funding_ee,funding_nee,funding_pfe,survival"));
    assert_eq!(profile.lines().count(), 49);
    let manifest = json(&fs::read_to_string(out.join("manifest.json")).unwrap());
    assert_eq!(manifest["n_paths"], 1);
    assert_eq!(manifest["seed"], 20190826);
}

#[test]
fn ig_config_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("ig.toml");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        ok(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    }
    let text = fs::read_to_string(a.join("fca_samples.csv")).unwrap();
    assert_eq!(text.lines().count(), 1001);
    for file in ["fca_samples.csv", "fba_samples.csv", "fva_samples.csv", "profile.csv", "manifest.json"] {
        assert_eq!(fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap(), "{file}");
    }
    let manifest = json(&fs::read_to_string(a.join("manifest.json")).unwrap());
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);

    // end to end, strict summation gives byte-identical result JSON
    let samples = a.join("fca_samples.csv");
    let args = ["--strict-sum", "robust", "--samples", samples.to_str().unwrap(), "--kind", "fca", "--delta", "0.86"];
    let first = ok(&args);
    assert_eq!(first, ok(&args));
    let record = json(&first);
    assert!(record["robust_value"].as_f64().unwrap() > record["baseline"].as_f64().unwrap());
}

#[test]
fn zero_volatility_profile_matches_deterministic_valuation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("ig_zero_vol.toml");
    ok(&["simulate", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    let c = SimulationConfig::from_path(&cfg).unwrap();
    let grid = c.observation_grid().unwrap();
    let curves = c.build_curves().unwrap();
    let det = deterministic_profile(&c.portfolio, &curves.discount, &grid).unwrap();
    let profile = fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    let max_notional = c.portfolio.iter().map(|s| s.notional).fold(0.0, f64::max);
    for (k, row) in csv_rows(&profile).iter().enumerate() {
        let t: f64 = row[0].parse().unwrap();
        let ee: f64 = row[1].parse().unwrap();
        let nee: f64 = row[2].parse().unwrap();
        let v = det[k + 1] * curves.discount.df(t) / c.exposure_unit;
        let tol = 1e-10 * max_notional / c.exposure_unit;
        assert!((ee - v.max(0.0)).abs() < tol, "t={t}: {ee} vs {v}");
        assert!((nee - v.min(0.0)).abs() < tol, "t={t}: {nee} vs {v}");
    }
}

#[test]
fn robust_analytic_instances() {
    let dir = tempfile::tempdir().unwrap();
    let fca = write(dir.path(), "fca.csv", "path_id,z_1,y_1\n0,1,1\n");
    let r = json(&ok(&["robust", "--samples", &fca, "--kind", "fca", "--delta", "1"]));
    assert!((r["robust_value"].as_f64().unwrap() - 2.0).abs() < 1e-6);
    assert!((r["multiplier_star"].as_f64().unwrap() - 0.5).abs() < 1e-6);

    let r = json(&ok(&["robust", "--samples", &fca, "--kind", "fca", "--delta", "0"]));
    assert_eq!(r["robust_value"], r["baseline"]);
    assert_eq!(r["multiplier_star"], "inf");

    let fba = write(dir.path(), "fba.csv", "path_id,z_1,y_1\n0,-1,1\n");
    let r = json(&ok(&["robust", "--samples", &fba, "--kind", "fba", "--delta", "4"]));
    assert_eq!(r["robust_value"], 0.0);
    assert_eq!(r["multiplier_star"], 0.0);

    let out = dir.path().join("nested/result.json");
    ok(&["robust", "--samples", &fca, "--kind", "fca", "--delta", "4", "--out", out.to_str().unwrap()]);
    let r = json(&fs::read_to_string(out).unwrap());
    assert!((r["robust_value"].as_f64().unwrap() - 3.0).abs() < 1e-6);
}

#[test]
fn sweep_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let fca = write(dir.path(), "fca.csv", "path_id,z_1,y_1\n0,1,1\n");
    let text = ok(&["sweep", "--samples", &fca, "--kind", "fca", "--deltas", "4,0.25,1,1"]);
    assert!(text.starts_with("delta,confidence,baseline,robust,multiplier\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 3);
    for (row, (d, v)) in rows.iter().zip([(0.25, 1.5), (1.0, 2.0), (4.0, 3.0)]) {
        assert_eq!(row[0].parse::<f64>().unwrap(), d);
        assert!(row[1].is_empty());
        assert!((row[3].parse::<f64>().unwrap() - v).abs() < 1e-6);
    }

    let fba = write(dir.path(), "fba.csv", "path_id,z_1,y_1\n0,-1,1\n");
    let text = ok(&["sweep", "--samples", &fba, "--kind", "fba", "--deltas", "0,0.25,0.5,1,2,4"]);
    let robust: Vec<f64> = csv_rows(&text).iter().map(|r| r[3].parse().unwrap()).collect();
    assert!(robust.windows(2).all(|w| w[1] >= w[0]));
    assert_eq!(robust[0], -1.0);
    assert!((robust[1] + 0.5).abs() < 1e-6);
    assert!(robust[3..].iter().all(|v| *v == 0.0));

    let two = write(dir.path(), "two.csv", "path_id,z_1,z_2,y_1,y_2\n0,1,2,1,1\n1,0.5,0,1,0\n");
    let text = ok(&["sweep", "--samples", &two, "--kind", "fca", "--confidences", "0.9,0.95"]);
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][1], "0.9");
    assert!(rows[1][0].parse::<f64>().unwrap() > rows[0][0].parse::<f64>().unwrap());
}

#[test]
fn radius_tables() {
    let text = ok(&["radius", "--n-samples", "1000", "--domain-radius", "1"]);
    assert!(text.starts_with("confidence,delta\n"));
    let deltas: Vec<f64> = csv_rows(&text).iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(deltas.len(), 6);
    assert!(deltas.windows(2).all(|w| w[1] > w[0]));
    assert!((deltas[3] - 0.19680902215763853).abs() < 1e-9);

    let text = ok(&["radius", "--n-samples", "50", "--domain-radius", "2.5", "--confidences", "0.95"]);
    assert_eq!(csv_rows(&text).len(), 1);

    let dir = tempfile::tempdir().unwrap();
    let same = write(dir.path(), "same.csv", "path_id,z_1,y_1\n0,1,1\n1,1,1\n");
    let out = run(&["radius", "--samples", &same, "--kind", "fca"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    let out = run(&["robust", "--samples", missing.to_str().unwrap(), "--kind", "fca", "--delta", "1"]);
    assert_eq!(out.status.code(), Some(3));

    let bad = write(dir.path(), "bad.csv", "path_id,z_1,y_1\n0,-1,1\n");
    let out = run(&["robust", "--samples", &bad, "--kind", "fca", "--delta", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let good = write(dir.path(), "good.csv", "path_id,z_1,y_1\n0,1,1\n");
    let out = run(&["robust", "--samples", &good, "--kind", "fca", "--delta", "-1"]);
    assert_eq!(out.status.code(), Some(1));

    // radius so small the default multiplier bracket cannot hold the minimizer
    let out = run(&["robust", "--samples", &good, "--kind", "fca", "--delta", "1e-20"]);
    assert_eq!(out.status.code(), Some(2));

    let cfg = write(dir.path(), "broken.toml", "seed = 1\n[grid]\nhorizon = \"x\"\n");
    let out = run(&["simulate", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
}

#[test]
fn verify_passes() {
    let text = ok(&["verify", "--instances", "20", "--step", "2e-3"]);
    let report = json(&text);
    for k in report["kinds"].as_array().unwrap() {
        assert_eq!(k["failures"], 0);
    }
}
