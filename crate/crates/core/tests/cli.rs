use std::path::Path;
use std::process::{Command, Output};

fn cli(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coarray-lab"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn geom_reports_layout() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(dir.path(), &["geom", "--array", "nested:5,5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("positions: [1, 2, 3, 4, 5, 10, 15, 20, 25, 30]"), "{text}");
    assert!(text.contains("mv: 30"));
    // lags -29..=29 plus header
    assert_eq!(text.lines().skip_while(|l| *l != "lag,weight").count(), 60);
}

#[test]
fn estimate_prints_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(
        dir.path(),
        &["estimate", "--array", "coprime", "--doas=-20,10", "--snr", "10", "-n", "500", "--seed", "3"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("source,true_deg,estimate_deg,error_deg"));
    for line in lines {
        let err: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(err.abs() < 0.1, "{line}");
    }
    // same seed, same output
    let again = cli(
        dir.path(),
        &["estimate", "--array", "coprime", "--doas=-20,10", "--snr", "10", "-n", "500", "--seed", "3"],
    );
    assert_eq!(o.stdout, again.stdout);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let too_many = cli(dir.path(), &["estimate", "--array", "ula:3", "--doas=-40,-20,0,20"]);
    assert_eq!(too_many.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&too_many.stderr).contains("K < Mv"));

    let no_config = cli(dir.path(), &["run"]);
    assert_eq!(no_config.status.code(), Some(2));

    let bad_array = cli(dir.path(), &["geom", "--array", "hexagon:4"]);
    assert_eq!(bad_array.status.code(), Some(2));

    let unidentifiable = cli(dir.path(), &["analyze", "--array", "ula:3", "--k", "5"]);
    assert_eq!(unidentifiable.status.code(), Some(2));

    let missing = cli(dir.path(), &["run", "--config", "nope.json"]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn analyze_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(dir.path(), &["analyze", "--array", "mra:10", "--k", "1,12", "--snr", "20"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("array,k,snr_db,n_snapshots,source,doa_deg,mse_rad2"));
    assert_eq!(text.lines().count(), 1 + 1 + 12);
}

const SMALL_RUN: &str = r#"{
  "experiment": "verify_mse",
  "arrays": [{"name": "nested", "kind": "nested", "n1": 2, "n2": 2}],
  "doas_deg": [-30, 15],
  "snr_db": [10],
  "snapshots": [200],
  "trials": 40,
  "seed": 11,
  "method": "both",
  "output": "res"
}"#;

#[test]
fn run_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        std::fs::write(d.path().join("cfg.json"), SMALL_RUN).unwrap();
        let o = cli(d.path(), &["--threads", "1", "run", "--config", "cfg.json"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for name in ["verify_mse.csv", "verify_mse_stats.csv", "verify_mse.gp", "manifest.json"] {
        let x = std::fs::read(a.path().join("res").join(name)).unwrap();
        let y = std::fs::read(b.path().join("res").join(name)).unwrap();
        assert_eq!(x, y, "{name} differs between runs");
    }
    let csv = std::fs::read_to_string(a.path().join("res/verify_mse.csv")).unwrap();
    assert!(csv.starts_with("array,method,snr_db,n_snapshots,trials,mse_an_rad2,mse_em_rad2,rel_err\n"));
    assert_eq!(csv.lines().count(), 3);

    // a different seed changes the recorded hash
    let o = cli(b.path(), &["--seed", "12", "--out", "res2", "run", "--config", "cfg.json"]);
    assert!(o.status.success());
    let hash = |p: &Path| -> String {
        let m: serde_json::Value = serde_json::from_slice(&std::fs::read(p.join("manifest.json")).unwrap()).unwrap();
        m["config_sha256"].as_str().unwrap().to_owned()
    };
    assert_ne!(hash(&b.path().join("res")), hash(&b.path().join("res2")));
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            coarray_lab::harness::ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 4);
}
