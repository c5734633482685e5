use std::path::Path;
use std::process::Command;

use fraclab::output::verify_manifest;

fn fraclab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fraclab"))
}

fn run(args: &[&str]) -> std::process::Output {
    fraclab().args(args).output().unwrap()
}

#[test]
fn sample_writes_requested_length() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.csv");
    let out = run(&["sample", "--h", "0.3", "--n", "64", "--seed", "7", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("step,t,increment,value"));
    assert_eq!(lines.count(), 65);
}

#[test]
fn config_file_and_flags_layer() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.txt");
    std::fs::write(&cfg, "# small run\nexperiment = styblinski\nruns = 3\nsteps = 50\nhs = anti, 0.5\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "styblinski",
        "--runs",
        "2",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let echoed = std::fs::read_to_string(out_dir.join("config.txt")).unwrap();
    assert!(echoed.lines().any(|l| l == "runs = 2"));
    assert!(echoed.lines().any(|l| l == "steps = 50"));
    assert!(verify_manifest(&out_dir).unwrap().is_empty());
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let go = |name: &str| {
        let p = dir.path().join(name);
        let out = run(&["--seed", "9", "bistable", "--runs", "4", "--steps", "100", "--out", p.to_str().unwrap()]);
        assert!(out.status.success());
        std::fs::read(p.join("manifest.json")).unwrap()
    };
    assert_eq!(go("a"), go("b"));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["saddle", "--set", "bogus=1"]).status.code(), Some(2));
    assert_eq!(run(&["optimize", "--landscape", "nowhere", "--h", "0.5"]).status.code(), Some(2));
    let missing = Path::new("/nonexistent/dir/c.txt");
    assert_eq!(run(&["--config", missing.to_str().unwrap(), "saddle"]).status.code(), Some(4));
}
