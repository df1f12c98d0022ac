use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_klein-billiards"));
    c.env_remove("KLEIN_BILLIARDS_OUT");
    c
}

fn run(args: &[&str]) -> (i32, String) {
    let out = bin().args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

fn json(args: &[&str]) -> Value {
    let (code, text) = run(args);
    assert_eq!(code, 0, "{text}");
    serde_json::from_str(&text).unwrap()
}

#[test]
fn cayley_reports_mode_and_verdict() {
    let r = json(&["cayley", "--a", "4,2,1", "--mu", "4/5", "--n", "4"]);
    assert_eq!(r["schema"], "klein-billiards/report/v1");
    assert_eq!(r["mode"], "exact");
    assert_eq!(r["result"]["periodic"], true);
    let r = json(&["cayley", "--a", "4,2,1", "--mu", "0.8", "--n", "4"]);
    assert_eq!(r["mode"], "float");
}

#[test]
fn error_block_and_exit_code() {
    let (code, text) = run(&["cayley", "--n", "0"]);
    assert_eq!(code, 61);
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["error"]["kind"], "BadParameter");
    assert!(v["error"]["message"].as_str().unwrap().contains("n must be ≥ 1"));
    let (code, _) = run(&["simulate", "--b", "1,2", "--start", "0,0", "--dir", "1,0", "--bounces", "3"]);
    assert_eq!(code, 10);
    let (code, _) = run(&["bogus"]);
    assert_eq!(code, 60);
}

#[test]
fn scan_periods_example() {
    let r = json(&["scan-periods", "--a", "4,2,1", "--n", "3", "--bracket", "1,2"]);
    let roots = r["result"]["roots"].as_array().unwrap();
    assert!(!roots.is_empty());
    for root in roots {
        assert!(root["indicator"].as_f64().unwrap() < 1e-10);
        assert_ne!(root["closure"], "open");
    }
}

#[test]
fn files_are_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let emit = |sub: &str| {
        let out = dir.path().join(sub);
        let status = bin()
            .args(["simulate", "--b", "5,3,1", "--caustic", "7/2,4/5", "--bounces", "30", "--closure", "30", "--seed", "12"])
            .args(["--out", out.to_str().unwrap()])
            .status()
            .unwrap();
        assert!(status.success());
        (std::fs::read(out.join("simulate.json")).unwrap(), std::fs::read(out.join("simulate.csv")).unwrap())
    };
    let (a, b) = (emit("one"), emit("two"));
    assert_eq!(a, b);
    let table = String::from_utf8(a.1).unwrap();
    assert!(table.starts_with("index,x1,x2,x3,p1,p2,p3,mu1,mu2\n"));
    assert_eq!(table.lines().count(), 32);
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .env("KLEIN_BILLIARDS_OUT", dir.path())
        .args(["hierarchy-check", "--b", "2,1", "--k", "0,1", "--states", "20", "--boundary-states", "20", "--geodesics", "1"])
        .status()
        .unwrap();
    assert!(status.success());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("hierarchy-check.json")).unwrap()).unwrap();
    for c in report["result"]["checks"].as_array().unwrap() {
        assert!(c["pass"].as_object().unwrap().values().all(|v| v == true), "{c}");
    }
    assert!(Path::new(&dir.path().join("hierarchy-check.csv")).exists());
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "command = \"cayley\"\na = \"4,2,1\"\nmu = \"4/5\"\nn = 3\n").unwrap();
    let r = json(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(r["result"]["periodic"], false);
    let r = json(&["cayley", "--config", cfg.to_str().unwrap(), "--n", "4"]);
    assert_eq!(r["result"]["periodic"], true);
}

#[test]
fn potential_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w2.txt");
    let r = json(&["potential", "--basis", "W2_1", "--b", "5,3,1", "--export", path.to_str().unwrap()]);
    assert_eq!(r["result"]["residual_status"], "zero (exact)");
    let again = json(&["potential", "--file", path.to_str().unwrap(), "--b", "5,3,1"]);
    assert_eq!(again["result"]["expanded"], r["result"]["expanded"]);
    std::fs::write(&path, "1 0 0 : 1\n").unwrap();
    let linear = json(&["potential", "--file", path.to_str().unwrap(), "--b", "5,3,1"]);
    assert_eq!(linear["result"]["separable"], false);
}

#[test]
fn table_format_and_geometry_commands() {
    let (code, text) = run(&["compare-models", "--b", "5,3,1", "--start", "0.1,0.2,-0.1", "--dir", "1,-1,1/2", "--format", "table"]);
    assert_eq!(code, 0);
    assert!(text.starts_with("index,point_deviation,direction_deviation\n"));
    let r = json(&["caustics", "--b", "2,1", "--x", "0,0", "--v", "1,1"]);
    assert_eq!(r["result"]["polynomial"]["coefficients"].as_array().unwrap().len(), 2);
    let r = json(&["elliptic", "--b", "2,1", "--lambda", "3/2,1/2", "--signs", "+,-"]);
    let x = r["result"]["x"].as_array().unwrap();
    assert!(x[1].as_f64().unwrap() < 0.0);
}
