use serde_json::{json, Value};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spectral-variance"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).arg("--out").arg(dir).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, value: &Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

fn experiment(sampler: Value, integrand: Value, truncation: Value, realizations: u64) -> Value {
    json!({
        "version": 1,
        "experiment": {
            "sampler": sampler,
            "integrand": integrand,
            "truncation": truncation,
            "realizations": realizations,
            "seed": 7
        }
    })
}

fn torus1(n: usize, pattern: &str) -> Value {
    json!({ "domain": { "kind": "torus", "dim": 1 }, "n": n, "pattern": { "kind": pattern } })
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn verify_group_z8_has_32_passing_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["verify-group", "--group", "Z8"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(tmp.path().join("verify_group.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 8 * 4);
    assert!(rows.iter().all(|r| r.ends_with(",PASS")));
    assert!(tmp.path().join("manifest.json").exists());
}

#[test]
fn verify_group_d4_lists_two_dimensional_irrep() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["verify-group", "--group", "D4"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.lines().any(|l| l.starts_with("D4") && l.contains(" E ")), "{out}");
}

#[test]
fn verify_group_unknown_name_is_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["verify-group", "--group", "Q8"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Q8"));
}

#[test]
fn predict_examples() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        (experiment(torus1(8, "iid-uniform"), json!({"kind": "cos"}), json!({"kind": "bandwidth", "bandwidth": 3}), 2), 0.0625),
        (
            experiment(torus1(8, "shifted-lattice"), json!({"kind": "constant", "value": 4.0}), json!({"kind": "bandwidth", "bandwidth": 3}), 2),
            0.0,
        ),
        (
            experiment(
                json!({ "domain": { "kind": "sphere" }, "n": 10, "pattern": { "kind": "iid-uniform" } }),
                json!({"kind": "harmonics", "terms": [{"l": 1, "m": 0, "re": 1.0}]}),
                json!({"kind": "max-degree", "max_degree": 1}),
                2,
            ),
            1.0 / (40.0 * PI),
        ),
    ];
    for (i, (config, expected)) in cases.iter().enumerate() {
        let path = write_config(tmp.path(), &format!("c{i}.json"), config);
        let out = tmp.path().join(format!("out{i}"));
        let o = run(&["predict", "--config", path.to_str().unwrap()], &out);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let v = read_json(&out.join("prediction.json"))["variance"].as_f64().unwrap();
        assert!((v - expected).abs() <= 1e-12 * expected.max(1e-300), "{v} vs {expected}");
        assert!(std::fs::read_to_string(out.join("contributions.csv")).unwrap().starts_with("label,"));
    }
}

#[test]
fn predict_without_spectrum_source_fails_then_uses_file() {
    let tmp = tempfile::tempdir().unwrap();
    let base = [0.0, 0.5, 2.0, 4.0];
    let sampler = json!({
        "domain": { "kind": "torus", "dim": 1 },
        "n": 4,
        "pattern": { "kind": "fixed-pattern-randomized", "base": base.iter().map(|x| vec![*x]).collect::<Vec<_>>() }
    });
    let mut config = experiment(sampler, json!({"kind": "cos"}), json!({"kind": "bandwidth", "bandwidth": 3}), 50);
    let path = write_config(tmp.path(), "c.json", &config);
    let o = run(&["predict", "--config", path.to_str().unwrap()], &tmp.path().join("p"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sampler_spectrum"));

    let o = run(&["spectrum", "--config", path.to_str().unwrap()], &tmp.path().join("spec"));
    assert_eq!(o.status.code(), Some(0));
    config["sampler_spectrum"] = json!("spec/spectrum.json");
    let path = write_config(tmp.path(), "c2.json", &config);
    let out = tmp.path().join("p2");
    let o = run(&["predict", "--config", path.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    // A shifted fixed pattern estimates cos exactly up to |mean e^{ix}|²/2.
    let (re, im) = base.iter().fold((0.0, 0.0), |(a, b), x: &f64| (a + x.cos() / 4.0, b + x.sin() / 4.0));
    let expected = (re * re + im * im) / 2.0;
    let v = read_json(&out.join("prediction.json"))["variance"].as_f64().unwrap();
    assert!((v - expected).abs() < 1e-12, "{v} vs {expected}");
}

#[test]
fn simulate_constant_has_zero_variance() {
    let tmp = tempfile::tempdir().unwrap();
    let c = experiment(torus1(5, "iid-uniform"), json!({"kind": "constant", "value": 2.0}), json!({"kind": "bandwidth", "bandwidth": 1}), 100);
    let path = write_config(tmp.path(), "c.json", &c);
    let o = run(&["simulate", "--config", path.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let s = read_json(&tmp.path().join("statistics.json"));
    assert_eq!(s["variance"].as_f64(), Some(0.0));
    assert_eq!(s["mean"][0].as_f64(), Some(2.0));
}

#[test]
fn compare_fail_exits_one() {
    // Bandwidth 1 truncates the cos(3x) integrand away entirely, so the
    // prediction is 0 while the simulation sees 1/(2N).
    let tmp = tempfile::tempdir().unwrap();
    let c = experiment(
        torus1(8, "iid-uniform"),
        json!({"kind": "cos", "frequency": 3}),
        json!({"kind": "bandwidth", "bandwidth": 1}),
        2000,
    );
    let path = write_config(tmp.path(), "c.json", &c);
    let o = run(&["compare", "--config", path.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL"));
    let report = read_json(&tmp.path().join("report.json"));
    assert_eq!(report["pass"], json!(false));
}

#[test]
fn seed_override_lands_in_manifest_and_digests_match() {
    let tmp = tempfile::tempdir().unwrap();
    let c = experiment(torus1(8, "iid-uniform"), json!({"kind": "cos"}), json!({"kind": "bandwidth", "bandwidth": 2}), 500);
    let path = write_config(tmp.path(), "c.json", &c);
    let o = run(&["compare", "--config", path.to_str().unwrap(), "--seed", "99", "--workers", "2"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let m = read_json(&tmp.path().join("manifest.json"));
    assert_eq!(m["seed"], json!(99));
    assert_eq!(m["config"]["experiment"]["seed"], json!(99));
    assert_eq!(m["workers"], json!(2));
    assert!(m["wall_clock_seconds"].as_f64().unwrap() >= 0.0);
    let outputs = m["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), 2);
    for o in outputs {
        use sha2::Digest;
        let bytes = std::fs::read(tmp.path().join(o["file"].as_str().unwrap())).unwrap();
        let hex: String = sha2::Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(o["sha256"].as_str().unwrap(), hex);
    }
}

#[test]
fn manifest_config_reproduces_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let c = experiment(torus1(6, "jittered-grid"), json!({"kind": "smooth"}), json!({"kind": "bandwidth", "bandwidth": 6}), 700);
    let path = write_config(tmp.path(), "c.json", &c);
    let first = tmp.path().join("first");
    assert_eq!(run(&["simulate", "--config", path.to_str().unwrap()], &first).status.code(), Some(0));
    let m = read_json(&first.join("manifest.json"));
    let replay = write_config(tmp.path(), "replay.json", &m["config"]);
    let second = tmp.path().join("second");
    assert_eq!(run(&["simulate", "--config", replay.to_str().unwrap()], &second).status.code(), Some(0));
    assert_eq!(
        std::fs::read(first.join("statistics.json")).unwrap(),
        std::fs::read(second.join("statistics.json")).unwrap()
    );
}

#[test]
fn dry_run_validates_without_writing() {
    let tmp = tempfile::tempdir().unwrap();
    let c = experiment(torus1(8, "iid-uniform"), json!({"kind": "cos"}), json!({"kind": "bandwidth", "bandwidth": 3}), 100_000_000);
    let path = write_config(tmp.path(), "c.json", &c);
    let out = tmp.path().join("never");
    for cmd in ["predict", "simulate", "compare", "spectrum"] {
        let o = run(&[cmd, "--config", path.to_str().unwrap(), "--dry-run"], &out);
        assert_eq!(o.status.code(), Some(0), "{cmd}");
    }
    assert!(!out.exists());
}

#[test]
fn config_errors_are_usage_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = experiment(torus1(8, "iid-uniform"), json!({"kind": "cos"}), json!({"kind": "bandwidth", "bandwidth": 3}), 10);
    c["experiment"]["realisations"] = json!(10);
    let typo = write_config(tmp.path(), "typo.json", &c);
    let mut c2 = experiment(torus1(8, "iid-uniform"), json!({"kind": "cos"}), json!({"kind": "max-degree", "max_degree": 3}), 10);
    let wrong = write_config(tmp.path(), "wrong.json", &c2);
    c2["version"] = json!(7);
    let version = write_config(tmp.path(), "version.json", &c2);
    for p in [&typo, &wrong, &version, &tmp.path().join("missing.json")] {
        let o = run(&["simulate", "--config", p.to_str().unwrap(), "--dry-run"], tmp.path());
        assert_eq!(o.status.code(), Some(2), "{}", p.display());
    }
    let o = run(&["simulate"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    let o = bin().args(["simulate", "--workers", "zero"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn spectrum_of_shifted_lattice_vanishes_below_n() {
    let tmp = tempfile::tempdir().unwrap();
    let c = experiment(torus1(8, "shifted-lattice"), json!({"kind": "constant", "value": 1.0}), json!({"kind": "bandwidth", "bandwidth": 9}), 50);
    let path = write_config(tmp.path(), "c.json", &c);
    assert_eq!(run(&["spectrum", "--config", path.to_str().unwrap()], tmp.path()).status.code(), Some(0));
    let csv = std::fs::read_to_string(tmp.path().join("spectrum.csv")).unwrap();
    let norm = 1.0 / (2.0 * PI);
    for line in csv.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let k: i64 = cols[0].trim_start_matches("t(").trim_end_matches(')').parse().unwrap();
        let p: f64 = cols[2].parse().unwrap();
        if k % 8 == 0 {
            assert!((p - norm).abs() < 1e-12, "k={k} p={p}");
        } else {
            assert!(p < 1e-25, "k={k} p={p}");
        }
    }
}

#[test]
fn spectrum_of_iid_torus_is_flat() {
    let tmp = tempfile::tempdir().unwrap();
    let c = experiment(torus1(4, "iid-uniform"), json!({"kind": "constant", "value": 1.0}), json!({"kind": "bandwidth", "bandwidth": 4}), 20_000);
    let path = write_config(tmp.path(), "c.json", &c);
    assert_eq!(run(&["spectrum", "--config", path.to_str().unwrap(), "--workers", "4"], tmp.path()).status.code(), Some(0));
    let csv = std::fs::read_to_string(tmp.path().join("spectrum.csv")).unwrap();
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    let se_col = header.iter().position(|h| *h == "se").unwrap();
    let flat = 1.0 / (4.0 * 2.0 * PI);
    for line in csv.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        if cols[0] == "t(0)" {
            continue;
        }
        let p: f64 = cols[2].parse().unwrap();
        let se: f64 = cols[se_col].parse().unwrap();
        assert!((p - flat).abs() <= 4.0 * se, "{line}");
    }
}

#[test]
fn spectrum_of_single_point_pattern_file_is_flat() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("one.txt"), "# a single point\n0.7 1.3\n").unwrap();
    let mut c = experiment(
        json!({ "domain": { "kind": "window", "window": { "dim": 2, "side": 2.0, "periodic": true } }, "n": 1, "pattern": { "kind": "iid-uniform" } }),
        json!({"kind": "constant", "value": 1.0}),
        json!({"kind": "shells", "grid": { "count": 10, "spacing": PI, "directions": 16 }}),
        2,
    );
    c["pattern_file"] = json!("one.txt");
    let path = write_config(tmp.path(), "c.json", &c);
    let out = tmp.path().join("out");
    let o = run(&["spectrum", "--config", path.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = read_json(&out.join("spectrum.json"));
    let power = s["power"].as_array().unwrap();
    // One lattice cell per shell, so no shell snaps onto the origin.
    let size = |k: usize| 2.0 * PI * PI * k as f64;
    for (k, p) in power.iter().enumerate().skip(1) {
        assert!((p.as_f64().unwrap() / size(k) - 1.0).abs() < 1e-12, "shell {k}: {p}");
    }
}
