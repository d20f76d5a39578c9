use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_timed-tx"));
    c.env_remove("TIMED_TX_OUT");
    c
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn run_to(scenario: &str, dir: &Path, extra: &[&str]) -> Output {
    bin().arg("run").arg(scenario).arg("--out").arg(dir).args(extra).output().unwrap()
}

const ARTIFACTS: [&str; 4] = ["trace.log", "offchain.json", "summary.json", "costs.txt"];

#[test]
fn opt_clean_matches_golden() {
    let tmp = tempfile::tempdir().unwrap();
    let stdout = ok(&run_to("opt_clean", tmp.path(), &[]));
    assert!(stdout.contains("SUCCESS via OPT"), "{stdout}");
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("golden/opt_clean");
    for f in ARTIFACTS {
        assert_eq!(fs::read(tmp.path().join(f)).unwrap(), fs::read(golden.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn withholder_is_convicted() {
    let tmp = tempfile::tempdir().unwrap();
    let stdout = ok(&run_to("pes_one_withholder", tmp.path(), &[]));
    assert!(stdout.contains("SUCCESS via PES"), "{stdout}");
    let s: serde_json::Value = serde_json::from_slice(&fs::read(tmp.path().join("summary.json")).unwrap()).unwrap();
    let conv = s["convictions"].as_array().unwrap();
    assert_eq!(conv.len(), 1);
    assert_eq!(conv[0]["offense"], "Missing");
}

#[test]
fn same_seed_same_bytes() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    ok(&run_to("pes_failure", a.path(), &["--seed", "99"]));
    ok(&run_to("pes_failure", b.path(), &["--seed", "99"]));
    for f in ARTIFACTS {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let c = tempfile::tempdir().unwrap();
    ok(&run_to("pes_failure", c.path(), &["--seed", "100"]));
    assert_ne!(fs::read(a.path().join("trace.log")).unwrap(), fs::read(c.path().join("trace.log")).unwrap());
}

#[test]
fn scenario_file_path_is_accepted() {
    let tmp = tempfile::tempdir().unwrap();
    let src = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/scenarios/fake_key.toml");
    let stdout = ok(&run_to(src.to_str().unwrap(), tmp.path(), &[]));
    assert!(stdout.contains("fake_key"), "{stdout}");
}

#[test]
fn malformed_config_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, "version = 1\nname = \"x\"\nseed = \"no\"\n").unwrap();
    let out = run_to(bad.to_str().unwrap(), &tmp.path().join("o"), &[]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    assert!(!tmp.path().join("o").exists());

    let out = bin().args(["--economics", bad.to_str().unwrap(), "run", "opt_clean"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["run", "no_such_scenario"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn infeasible_scenario_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let src =
        fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/scenarios/opt_clean.toml")).unwrap();
    let small = src.replace("executors = 34", "executors = 12");
    assert_ne!(small, src);
    let p = tmp.path().join("small.toml");
    fs::write(&p, small).unwrap();
    let out = run_to(p.to_str().unwrap(), &tmp.path().join("o"), &[]);
    assert!(!out.status.success());
}

#[test]
fn out_dir_from_env() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bin().env("TIMED_TX_OUT", tmp.path()).args(["run", "opt_pool"]).output().unwrap();
    ok(&out);
    assert!(tmp.path().join("opt_pool/trace.log").is_file());
}

#[test]
fn analyze_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let analyze = |args: &[&str]| ok(&bin().arg("analyze").args(args).arg("--out").arg(tmp.path()).output().unwrap());

    let sybil = analyze(&["sybil", "--l", "2..6", "--g_o", "100"]);
    let rows: Vec<&str> = sybil.lines().skip(1).take(5).collect();
    for (i, row) in rows.iter().enumerate() {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols[3], ((i as u64 + 1) * 100).to_string(), "{row}");
    }

    let cost = analyze(&["cost", "--path", "all", "--nl", "10..60:10"]);
    assert_eq!(cost.lines().next().unwrap(), "nl,opt_usd,pes_usd,pool_usd");
    assert_eq!(cost.lines().skip(1).take_while(|l| !l.starts_with("wrote")).count(), 6);
    assert!(tmp.path().join("cost_breakdown.csv").is_file());

    let pool = analyze(&["pooling", "--f", "0..19"]);
    let avgs: Vec<f64> =
        pool.lines().skip(1).take(20).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(avgs.len(), 20);
    assert!(avgs.windows(2).all(|w| w[1] < w[0]));

    let bribery = analyze(&["bribery", "--tl", "3", "--reputation", "1"]);
    assert!(bribery.contains("3,1,3000000000000000000,3.000000"), "{bribery}");

    let bad = bin().args(["analyze", "sybil", "--l", "1"]).arg("--out").arg(tmp.path()).output().unwrap();
    assert!(!bad.status.success());
}

#[test]
fn golden_is_current() {
    let out = bin().arg("verify-golden").output().unwrap();
    let stdout = ok(&out);
    assert!(!stdout.contains("MISMATCH"), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.ends_with(": ok")).count(), 9);
}
