use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_symmix"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

/// Set `UPDATE_GOLDEN=1` to rewrite the expected files.
#[test]
fn help_matches_golden_files() {
    for (file, args) in [
        ("help.txt", vec!["--help"]),
        ("help_fit.txt", vec!["fit", "--help"]),
        ("help_g0.txt", vec!["g0", "--help"]),
        ("help_ident.txt", vec!["ident", "--help"]),
        ("help_boot.txt", vec!["boot", "--help"]),
        ("help_sim.txt", vec!["sim", "--help"]),
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(0));
        let text = String::from_utf8(out.stdout).unwrap();
        if std::env::var_os("UPDATE_GOLDEN").is_some() {
            std::fs::write(golden(file), &text).unwrap();
        }
        let expected = std::fs::read_to_string(golden(file)).unwrap();
        assert_eq!(text, expected, "{file} is out of date");
        for code in ["0  ", "1  ", "2  ", "3  ", "4  "] {
            assert!(text.contains(code), "{file} lacks exit code {code}");
        }
    }
}

#[test]
fn fit_k1_on_symmetric_file() {
    let out = run(&["fit", "--k", "1", fixture("symmetric3.csv").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["params"]["locations"][0].as_f64(), Some(0.0));
}

#[test]
fn g0_from_fit_matches_inline() {
    let dir = tempfile::tempdir().unwrap();
    let fit = dir.path().join("fit.json");
    let inline = dir.path().join("inline.csv");
    let reread = dir.path().join("reread.csv");
    let f = fit.to_str().unwrap();
    assert_eq!(run(&["fit", "--faithful", "-o", f]).status.code(), Some(0));
    let out = run(&["g0", "--faithful", "-o", inline.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("monotone_violation"));
    assert_eq!(
        run(&["g0", "--faithful", "--from-fit", f, "-o", reread.to_str().unwrap()]).status.code(),
        Some(0)
    );
    let a = std::fs::read_to_string(&inline).unwrap();
    assert_eq!(a, std::fs::read_to_string(&reread).unwrap());
    assert!(a.starts_with("t,value\n"));
}

#[test]
fn g0_guard_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let fit = dir.path().join("half.json");
    let out = run(&["fit", "--faithful"]);
    let mut v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    v["params"]["weights"] = serde_json::json!([0.5, 0.5]);
    std::fs::write(&fit, v.to_string()).unwrap();
    let out = run(&["g0", "--faithful", "--from-fit", fit.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["fit", "/no/such/file.csv"]).status.code(), Some(2));
    assert_eq!(run(&["fit"]).status.code(), Some(1));
    assert_eq!(run(&["fit", "--faithful", "--unknown"]).status.code(), Some(1));
    assert_eq!(run(&["fit", "--faithful", "--method", "nmle", "--k", "3"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "1\nabc\n").unwrap();
    assert_eq!(run(&["fit", bad.to_str().unwrap()]).status.code(), Some(2));
    let one = dir.path().join("one.csv");
    std::fs::write(&one, "1\n").unwrap();
    assert_eq!(run(&["fit", one.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn ident_prints_verdict() {
    let out = run(&["ident", "--k", "3", "--lambda", "4,3,2", "--mu", "0,4,6"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["reason"], "CASE_A2");
    assert_eq!(v["member"], false);
    assert_eq!(v["witness"]["r"].as_f64(), Some(2.0));
}

#[test]
fn boot_minimal_and_deterministic() {
    let f = fixture("symmetric3.csv");
    let a = run(&["boot", "--method", "k1", "--B", "2", "--seed", "4", f.to_str().unwrap()]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["B"], 2);
    let b = run(&["boot", "--method", "k1", "-B", "2", "--seed", "4", f.to_str().unwrap()]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn sim_writes_seeded_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "sim",
        fixture("scenario_t2.json").to_str().unwrap(),
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("scenario_t2_seed17.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * 2);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("scenario_t2_seed17_summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["summary"].as_array().unwrap().len(), 6);

    let again = tempfile::tempdir().unwrap();
    run(&["sim", fixture("scenario_t2.json").to_str().unwrap(), "--output-dir", again.path().to_str().unwrap()]);
    assert_eq!(csv, std::fs::read_to_string(again.path().join("scenario_t2_seed17.csv")).unwrap());
}
