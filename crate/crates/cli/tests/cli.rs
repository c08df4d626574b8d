use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn supergraph(args: &[&str], env_seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_supergraph"));
    cmd.args(args).env_remove("SUPERGRAPH_SEED");
    if let Some(s) = env_seed {
        cmd.env("SUPERGRAPH_SEED", s);
    }
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path) -> String {
    let path = dir.join("campaign.json");
    fs::write(
        &path,
        r#"{"schema_version": 1, "n": 30, "m": 30, "motif": "K3",
            "law": {"kind": "deterministic", "x": 5, "q": 0.5},
            "replicates": 5, "regime": "normal", "seed": 4}"#,
    )
    .unwrap();
    path.to_str().unwrap().to_string()
}

fn seeds(csv: &str) -> Vec<String> {
    csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().to_string()).collect()
}

#[test]
fn run_writes_artifacts_and_honours_seed_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let out = |name: &str| dir.path().join(name).to_str().unwrap().to_string();

    let base = supergraph(&["run", "--config", &config, "--out", &out("a")], None);
    assert!(base.status.success(), "{}", String::from_utf8_lossy(&base.stderr));
    for f in ["replicates.csv", "summary.json", "manifest.json"] {
        assert!(dir.path().join("a").join(f).exists(), "{f}");
    }
    let csv_a = fs::read_to_string(dir.path().join("a/replicates.csv")).unwrap();
    assert_eq!(csv_a.lines().count(), 6);

    let env = supergraph(&["run", "--config", &config, "--out", &out("b")], Some("99"));
    assert!(env.status.success());
    let csv_b = fs::read_to_string(dir.path().join("b/replicates.csv")).unwrap();
    assert_ne!(seeds(&csv_a), seeds(&csv_b));

    let flag = supergraph(&["run", "--config", &config, "--out", &out("c"), "--seed", "99", "--threads", "2"], Some("5"));
    assert!(flag.status.success());
    assert_eq!(fs::read_to_string(dir.path().join("c/replicates.csv")).unwrap(), csv_b);
}

#[test]
fn verify_passes() {
    let out = supergraph(&["verify"], None);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("[PASS]")).count(), 6);
}

#[test]
fn motif_info_reads_names_and_files() {
    let out = supergraph(&["motif-info", "K4"], None);
    let info: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(info["automorphisms"], 24);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("diamond.txt");
    fs::write(&path, "4\n1 2\n2 3\n3 4\n4 1\n1 3\n").unwrap();
    let out = supergraph(&["motif-info", path.to_str().unwrap()], None);
    let info: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(info["copies_in_complete"], 6);
    assert_eq!(info["balanced"], true);

    assert!(!supergraph(&["motif-info", "nonsense"], None).status.success());
}

#[test]
fn hf_reports_the_overlap_term() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let out = supergraph(&["hf", "--config", &config], None);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["h_f"].as_f64().unwrap() > 0.0);
    assert!(v["expected_polychromatic"].as_f64().unwrap() > 0.0);
}
