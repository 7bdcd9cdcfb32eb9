//! End-to-end runs of the `levylab` binary.

use std::fs;
use std::process::{Command, Output};

fn levylab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levylab"))
        .args(args)
        .env_remove("LEVYLAB_THREADS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn hamming_example() {
    let o = levylab(&["hamming", "--n", "10"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "φ(σ,η) = 1/5\nφ(ση,η²) = 1\n");
}

#[test]
fn levy_bound_example() {
    let o = levylab(&["levy-bound", "--n", "100", "--eps", "0"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("0.626657"), "{}", stdout(&o));
}

#[test]
fn leader_json_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<_> = ["a.json", "b.json"]
        .iter()
        .map(|n| dir.path().join(n))
        .collect();
    for p in &paths {
        let o = levylab(&[
            "leader",
            "--d",
            "300",
            "--eps",
            "0.05",
            "--seed",
            "7",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).contains("certificate-empty"));
    }
    let a = fs::read(&paths[0]).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, fs::read(&paths[1]).unwrap());
}

#[test]
fn usage_errors_exit_with_2() {
    for args in [
        &["frobnicate"][..],
        &[],
        &["leader", "--d", "10"],
        &["hamming", "--n", "7"],
        &["hamming", "--eps", "0.1"],
        &["folner", "--group", "nope"],
        &["alpha-exact", "--n", "not-a-number"],
    ] {
        let o = levylab(args);
        assert_eq!(
            o.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn resource_limit_exits_with_3() {
    let o = levylab(&[
        "folner",
        "--d",
        "60",
        "--n",
        "10",
        "--strategy",
        "exhaustive",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("best so far"));
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_levylab"))
        .args(["hamming", "--n", "4"])
        .env("LEVYLAB_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn saved_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let direct = dir.path().join("direct.csv");
    let o = levylab(&[
        "--save-config",
        cfg.to_str().unwrap(),
        "alpha-mc",
        "--d",
        "5",
        "--m",
        "3000",
        "--seed",
        "4",
        "--out",
        direct.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = fs::read_to_string(&cfg).unwrap();
    assert!(text.starts_with("subcommand = alpha-mc\n"), "{text}");
    // rerun from the file, redirected to a new output path
    let replay = dir.path().join("replay.csv");
    let edited = text.replace(direct.to_str().unwrap(), replay.to_str().unwrap());
    fs::write(&cfg, edited).unwrap();
    let o = levylab(&["run", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(&direct).unwrap(), fs::read(&replay).unwrap());
}

#[test]
fn out_flag_prints_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.csv");
    let o = levylab(&[
        "hamming",
        "--n",
        "6",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let table = stdout(&o);
    assert!(table.starts_with("key"), "{table}");
    assert!(table.contains("1/3"));
    assert_eq!(
        fs::read_to_string(&path).unwrap(),
        "n,hamming,phi,phi_product\n6,2,1/3,1\n"
    );
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "subcommand = hamming\ncolour = blue\n").unwrap();
    assert_eq!(
        levylab(&["run", cfg.to_str().unwrap()]).status.code(),
        Some(2)
    );
}
