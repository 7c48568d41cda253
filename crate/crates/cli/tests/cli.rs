use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let argv: Vec<String> = std::iter::once("cmreduce").chain(args.iter().copied()).map(String::from).collect();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cmreduce_cli::run(&argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn mass_of_23() {
    assert_eq!(run(&["mass", "--p", "23"]), (0, "11/6\n".into(), String::new()));
    assert_eq!(json(&["mass", "--p", "101", "--json"])["mass"], "25/3");
}

#[test]
fn classgroup_json() {
    let v = json(&["classgroup", "--D", "-23", "--json"]);
    assert_eq!(v["h"], 3);
    let (code, out, _) = run(&["classgroup", "--D", "-71"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("D = -71, h = 7\n"));
}

#[test]
fn classpoly_with_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().to_str().unwrap();
    let a = json(&["classpoly", "--D", "-23", "--cache-dir", cache, "--json"]);
    assert!(dir.path().join("classpoly-v1-D-23.json").exists());
    let b = json(&["classpoly", "--D", "-23", "--cache-dir", cache, "--json"]);
    assert_eq!(a, b);
    let v = json(&["classpoly", "--D", "-23", "--p", "11", "--json"]);
    let roots = v["roots"].as_array().unwrap();
    assert_eq!(roots.iter().map(|r| r["multiplicity"].as_u64().unwrap()).sum::<u64>(), 3);
}

#[test]
fn quaternion_subcommands() {
    let v = json(&["quat", "--p", "11", "classes", "--json"]);
    assert_eq!(v["classes"].as_array().map(Vec::len), Some(2));
    let v = json(&["quat", "--p", "23", "order", "--json"]);
    assert_eq!(v["reduced_discriminant"], "23");
    let (code, out, _) = run(&["quat", "--p", "11", "embed", "--D", "-4"]);
    assert_eq!(code, 0);
    assert!(out.contains("iota(sqrt(-4))"));
    // 11 splits in Q(√−7)
    assert_eq!(run(&["quat", "--p", "11", "embed", "--D", "-7"]).0, 1);
}

#[test]
fn reductions() {
    let v = json(&["reduce", "--D", "-23", "--p", "11", "--json"]);
    assert_eq!(v["p"], 11);
    let v = json(&["reduce", "--D", "-23", "--json"]);
    assert_eq!(v["points"].as_array().map(Vec::len), Some(3));
    let v = json(&["joint", "--D", "-311", "--primes", "11,23", "--json"]);
    assert_eq!(v["h"], 19);
}

#[test]
fn errors_and_help() {
    assert_eq!(run(&["--bogus"]).0, 1);
    assert_eq!(run(&[]).0, 1);
    assert_eq!(run(&["mass"]).0, 1);
    assert_eq!(run(&["mass", "--p", "22"]).0, 1);
    assert_eq!(run(&["classgroup", "--D", "5"]).0, 1);
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("scan"));
    let (code, out, _) = run(&["--version"]);
    assert_eq!(code, 0);
    assert!(out.contains(env!("CARGO_PKG_VERSION")));
    assert_eq!(run(&["scan", "--primes", "11,11"]).0, 1);
}

#[test]
fn scan_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scan.csv");
    let args = ["scan", "--dmax", "400", "--fundamental", "--threads", "2", "--out", path.to_str().unwrap()];
    assert_eq!(run(&args).0, 0);
    let first = std::fs::read(&path).unwrap();
    assert_eq!(run(&args).0, 0);
    assert_eq!(first, std::fs::read(&path).unwrap());
    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with("# cmreduce "));
    assert_eq!(text.lines().nth(1), Some("D,h,primes,tv,chi2,surjective,min_im,box_mass_y2"));
    let (_, one_thread, _) = run(&["scan", "--dmax", "400", "--fundamental", "--threads", "1"]);
    assert_eq!(one_thread, text);
    let v = json(&["scan", "--dmax", "400", "--fundamental", "--json"]);
    assert_eq!(v["rows"].as_array().map(Vec::len), Some(text.lines().count() - 2));
}

#[test]
fn verify_quick() {
    let (code, out, _) = run(&["verify", "--quick"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.lines().all(|l| l.starts_with("PASS ")));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_cmreduce");
    let out = Command::new(bin).args(["mass", "--p", "23"]).output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout), "11/6\n");
    let out = Command::new(bin).arg("--nope").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}
