use std::path::Path;
use std::process::{Command, Output};

fn c2rf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_c2rf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> serde_json::Value {
    let out = c2rf(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap_or(serde_json::Value::Null)
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

#[test]
fn end_to_end_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let info = ok(&["ingest", "--synthetic", "--n", "200", "--seed", "3", "--out", &p(d, "d.json")]);
    assert_eq!(info["points"], 200);

    let split = ok(&["sample", "--dataset", &p(d, "d.json"), "--fraction", "0.1", "--out", &p(d, "s.json")]);
    assert_eq!(split["labeled"], 20);
    assert_eq!(split["unlabeled"], 180);

    ok(&[
        "forest", "--dataset", &p(d, "d.json"), "--split", &p(d, "s.json"),
        "--trees", "10", "--out", &p(d, "f.json"), "--votes-out", &p(d, "v.json"),
    ]);
    assert!(d.join("f.json").exists());

    let sol = ok(&[
        "solve", "--votes", &p(d, "v.json"), "--split", &p(d, "s.json"),
        "--time-limit", "30", "--trace", &p(d, "trace.csv"), "--out", &p(d, "sol.json"),
    ]);
    assert_eq!(sol["status"], "optimal");
    assert_eq!(sol["predicted_positive"], split["lambda"]);
    let trace = std::fs::read_to_string(d.join("trace.csv")).unwrap();
    assert!(trace.starts_with("node,"));

    let exp = ok(&[
        "export-mps", "--votes", &p(d, "v.json"), "--split", &p(d, "s.json"),
        "--presolve", "--out", &p(d, "m.mps"), "--map-out", &p(d, "map.json"), "--lp-out", &p(d, "m.lp"),
    ]);
    assert!(exp["binaries"].as_u64().unwrap() <= 180);
    let mps = std::fs::read_to_string(d.join("m.mps")).unwrap();
    assert!(mps.starts_with("NAME"));
    assert!(mps.trim_end().ends_with("ENDATA"));
    assert!(d.join("map.json").exists());
    assert!(std::fs::read_to_string(d.join("m.lp")).unwrap().contains("Minimize"));
}

#[test]
fn oracle_on_csv_votes() {
    let dir = tempfile::tempdir().unwrap();
    let v = p(dir.path(), "v.csv");
    std::fs::write(&v, "1,1,-1,-1\n1,-1,1,-1\n").unwrap();
    let sol = ok(&["oracle", "--votes", &v, "--lambda", "2"]);
    assert_eq!(sol["objective"], 0.0);
    let z: Vec<u64> = sol["z"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
    assert_eq!(z[0], 1);
    assert_eq!(z[3], 0);
    assert_eq!(z.iter().sum::<u64>(), 2);
}

#[test]
fn benchmark_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = p(dir.path(), "bench");
    let run = c2rf(&[
        "benchmark", "--synthetic", "--n", "120", "--seeds", "1,2", "--labeled-fraction", "0.1",
        "--approaches", "rf,p-c2rf", "--time-limit", "30", "--out-dir", &out,
    ]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let table = String::from_utf8(run.stdout).unwrap();
    assert!(table.starts_with("instance,approach,"));
    assert_eq!(table.lines().count(), 3);

    let rep = c2rf(&["report", "--results-dir", &out, "--time-limit", "30", "--paper-scale"]);
    assert!(rep.status.success());
    for f in ["medians.csv", "ecdf.csv", "results.csv"] {
        assert!(dir.path().join("bench").join(f).exists(), "{f}");
    }
    let medians = std::fs::read_to_string(dir.path().join("bench/medians.csv")).unwrap();
    let rf = medians.lines().find(|l| l.starts_with("synthetic,rf,")).unwrap();
    assert!(rf.ends_with(",0,0"));
}

#[test]
fn bad_input_fails_cleanly() {
    let out = c2rf(&["solve", "--votes", "/nonexistent.json", "--lambda", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let out = c2rf(&["solve", "--votes", "x.json"]);
    assert!(!out.status.success());

    let dir = tempfile::tempdir().unwrap();
    let v = p(dir.path(), "v.csv");
    std::fs::write(&v, "1,-1\n").unwrap();
    let out = c2rf(&["solve", "--votes", &v, "--lambda", "5"]);
    assert_eq!(out.status.code(), Some(1));
}
