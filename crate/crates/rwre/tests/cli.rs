use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rwre(args: &[&str], config: Option<&str>, dir: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rwre"));
    cmd.args(args).arg("--out").arg(dir.join("out"));
    if let Some(text) = config {
        let path = dir.join("config.json");
        fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn classify_ballistic_mixture() {
    let dir = tempfile::tempdir().unwrap();
    let o = rwre(&["classify"], Some(r#"{"law":{"kind":"mixture","atoms":[{"p":0.7,"w":0.5},{"p":0.6,"w":0.5}]}}"#), dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/classify.json")).unwrap()).unwrap();
    assert_eq!(report["report"]["regime"], "ballistic_right");
    assert!((report["report"]["speed"].as_f64().unwrap() - 0.292_308).abs() < 1e-6);
}

#[test]
fn classify_fair_point_mass_is_recurrent() {
    let dir = tempfile::tempdir().unwrap();
    let o = rwre(&["classify"], Some(r#"{"law":{"kind":"point","p":0.5}}"#), dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("regime recurrent"), "{}", stdout(&o));
}

#[test]
fn malformed_weights_exit_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = rwre(
        &["classify"],
        Some(r#"{"law":{"kind":"mixture","atoms":[{"p":0.7,"w":0.5},{"p":0.6,"w":0.6}]}}"#),
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("weights sum to"), "{}", stderr(&o));
}

#[test]
fn unknown_config_field_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = rwre(&["classify"], Some(r#"{"replcias": 3}"#), dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = rwre(&["classify"], Some("not json"), dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unclipped_beta_classification_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = rwre(&["classify"], Some(r#"{"law":{"kind":"beta","alpha":2,"beta":2}}"#), dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("clip"), "{}", stderr(&o));
}

#[test]
fn enumeration_only_averaged_profile_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let o = rwre(
        &["rate", "--format", "csv"],
        Some(r#"{"law":{"kind":"beta","alpha":2,"beta":2,"clip":[0.05,0.95]},"flavor":"averaged","method":"enumeration","ladder":[8,12,16],"grid":[-0.5,0,0.5]}"#),
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("out/rate.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 9);
    for row in rows {
        assert_eq!(row[5], "averaged");
        assert_eq!(row[6], "0", "stderr of exact rung");
        assert_eq!(row[7], "", "no ESS for exact rung");
        assert_eq!(row[8], "true");
    }
    assert!(!dir.path().join("out/rate.json").exists());
}

#[test]
fn enumeration_beyond_budget_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = rwre(&["rate"], Some(r#"{"flavor":"averaged","method":"enumeration","ladder":[8,16,32]}"#), dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("enumeration budget"), "{}", stderr(&o));
}

#[test]
fn same_config_and_seed_give_identical_bytes() {
    let config = r#"{"law":{"kind":"mixture","atoms":[{"p":0.8,"w":0.5},{"p":0.35,"w":0.5}]},
        "flavor":"averaged","ladder":[12,40,80],"grid":[0.2,0.5],"importance":{"replicas":300,"pilot_replicas":64}}"#;
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let oa = rwre(&["rate", "--seed", "5", "--threads", "1"], Some(config), a.path());
    let ob = rwre(&["rate", "--seed", "5", "--threads", "4"], Some(config), b.path());
    assert_eq!(oa.status.code(), Some(0), "{}", stderr(&oa));
    assert_eq!(ob.status.code(), Some(0));
    for file in ["rate.csv", "rate.json"] {
        assert_eq!(fs::read(a.path().join("out").join(file)).unwrap(), fs::read(b.path().join("out").join(file)).unwrap());
    }
    let oa = rwre(&["speed", "--seed", "9", "--threads", "2"], Some(r#"{"n":500,"replicas":40}"#), a.path());
    let ob = rwre(&["speed", "--seed", "9", "--threads", "3"], Some(r#"{"n":500,"replicas":40}"#), b.path());
    assert_eq!(oa.status.code(), Some(0));
    assert_eq!(ob.status.code(), Some(0));
    assert_eq!(fs::read(a.path().join("out/speed.csv")).unwrap(), fs::read(b.path().join("out/speed.csv")).unwrap());
    let oc = rwre(&["speed", "--seed", "10"], Some(r#"{"n":500,"replicas":40}"#), b.path());
    assert_eq!(oc.status.code(), Some(0));
    assert_ne!(fs::read(a.path().join("out/speed.csv")).unwrap(), fs::read(b.path().join("out/speed.csv")).unwrap());
}

#[test]
fn outputs_embed_hash_and_seed_and_echo_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = rwre(&["superadd", "--seed", "42"], Some(r#"{"law":{"kind":"point","p":0.7},"pairs":[[50,50]]}"#), dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = dir.path().join("out");
    let echoed: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("config.json")).unwrap()).unwrap();
    let hash = echoed["config_sha256"].as_str().unwrap().to_string();
    assert_eq!(hash.len(), 64);
    assert_eq!(echoed["config"]["seed"], 42);
    assert_eq!(echoed["config"]["window"], 2, "defaults are filled in");
    let csv = fs::read_to_string(out.join("superadd.csv")).unwrap();
    assert!(csv.starts_with(&format!("# config_sha256={hash}\n# seed=42\n")));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("superadd.json")).unwrap()).unwrap();
    assert_eq!(report["config_sha256"], hash.as_str());
    assert_eq!(report["seed"], 42);
    let margin = &report["margins"][0];
    assert_eq!(margin["k"], 50);
    assert_eq!(margin["l"], 50);
    assert!(margin["margin"].as_f64().unwrap() >= -1e-12);
}

#[test]
fn every_subcommand_runs() {
    let config = r#"{"law":{"kind":"beta","alpha":2,"beta":2,"clip":[0.05,0.95]},"n":200,"replicas":20,
        "grid":[-0.4,0.3],"ladder":[50,100],"horizon":300,"pairs":[[20,20]]}"#;
    for sub in ["classify", "speed", "rate", "rate-zero", "entropy-bound", "superadd", "posterior-demo"] {
        let dir = tempfile::tempdir().unwrap();
        let o = rwre(&[sub], Some(config), dir.path());
        assert_eq!(o.status.code(), Some(0), "{sub}: {}", stderr(&o));
        assert!(dir.path().join("out/config.json").exists());
    }
}

#[test]
fn posterior_demo_reports_chain_rule_weight() {
    let dir = tempfile::tempdir().unwrap();
    let o = rwre(&["posterior-demo"], Some(r#"{"law":{"kind":"beta","alpha":2,"beta":2},"path":[1,-1,1],"n":2}"#), dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/posterior.json")).unwrap()).unwrap();
    assert!((doc["log_weight"].as_f64().unwrap() - 0.15f64.ln()).abs() < 1e-12);
    assert_eq!(doc["path"], serde_json::json!([1, -1, 1]));
    let dist = fs::read_to_string(dir.path().join("out/distribution.csv")).unwrap();
    assert!(dist.contains("position,probability,log_probability"));
}

#[test]
fn validate_filter_runs_one_group() {
    let dir = tempfile::tempdir().unwrap();
    let o = rwre(&["validate", "--filter", "conjugacy"], None, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).collect();
    assert_eq!(lines.len(), 3, "{text}");
    assert!(lines.iter().all(|l| l.contains("conjugacy/") && l.contains(" ms")));
}

#[test]
fn validate_full_suite_passes_quickly() {
    let dir = tempfile::tempdir().unwrap();
    let start = std::time::Instant::now();
    let o = rwre(&["validate"], None, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    assert!(start.elapsed().as_secs() < 60);
}
