use std::path::Path;
use std::process::{Command, Output};

fn rilab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rilab")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn exit_codes() {
    assert_eq!(code(&rilab(&["green", "--point", "0,0,0"])), 0);
    assert_eq!(code(&rilab(&["--version"])), 0);
    let o = rilab(&["frobnicate"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(code(&rilab(&["trigger", "--p-upper", "2", "--l0", "4", "--eps1", "0", "--eps2", "0"])), 1);
    assert_eq!(code(&rilab(&["green", "--point", "0,0"])), 3);
    assert_eq!(code(&rilab(&["vacuum", "--N", "2", "--u", "1", "--box", "1", "--trials", "5"])), 3);
    assert_eq!(code(&rilab(&["--threads", "0", "green", "--point", "0,0,0"])), 1);
}

#[test]
fn green_prints_the_value() {
    let o = rilab(&["green", "--point", "0,0,0"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let g = v["value"].as_f64().or_else(|| v.as_f64()).unwrap_or_else(|| panic!("{v}"));
    assert!((g - 1.516386059151978).abs() < 1e-9);
}

#[test]
fn manifest_argv_replays_to_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a.csv");
    let o = rilab(&[
        "--seed",
        "3",
        "--trials",
        "6",
        "--out",
        path(&out),
        "intersect",
        "--N",
        "4",
        "--u1",
        "1",
        "--u2",
        "2",
        "--L",
        "2",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let first = std::fs::read(&out).unwrap();
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("a.csv.manifest.json")).unwrap()).unwrap();
    let argv: Vec<String> =
        manifest["argv"].as_array().unwrap().iter().map(|a| a.as_str().unwrap().to_owned()).collect();
    std::fs::remove_file(&out).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_rilab")).args(&argv).output().unwrap();
    assert_eq!(code(&o), 0, "{argv:?}");
    assert_eq!(std::fs::read(&out).unwrap(), first);
    assert_eq!(manifest["seed"], 3);
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("i{threads}.csv"));
        let o = rilab(&[
            "--threads",
            threads,
            "--seed",
            "8",
            "--trials",
            "12",
            "--out",
            path(&out),
            "intersect",
            "--N",
            "4",
            "--u1",
            "1.5",
            "--u2",
            "1",
            "--L",
            "1",
        ]);
        assert_eq!(code(&o), 0);
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let text = String::from_utf8(outputs.remove(0)).unwrap();
    assert!(text.starts_with("sample,seed,u1,u2,L,"));
    assert_eq!(text.lines().count(), 13);
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "seed = 5\np-upper = 1e-9\nl0 = 4\neps1 = 0.0\neps2 = 0.0\n").unwrap();
    let o = rilab(&["trigger", "--config", path(&cfg)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"], "PASS");
    let o = rilab(&["trigger", "--config", path(&cfg), "--p-upper", "0.5"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"], "FAIL");
    assert_eq!(code(&rilab(&["trigger", "--config", path(&dir.path().join("missing.toml"))])), 1);
}

#[test]
fn sample_container_dumps_as_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.bin");
    let o = rilab(&["--seed", "2", "--out", path(&out), "sample", "--N", "3", "--u", "1.5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = rilab(&["dump", "--input", path(&out)]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v.is_object());
    std::fs::write(&out, b"not a container").unwrap();
    assert_eq!(code(&rilab(&["dump", "--input", path(&out)])), 1);
}
