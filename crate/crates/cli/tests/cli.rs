use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn cm2(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cm2")).args(args).output().unwrap()
}

fn manifest() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

fn f8_field() -> String {
    manifest().join("../core/data/fields/k_f8.field").display().to_string()
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("cm2-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

#[test]
fn genus1_prints_the_class_polynomial() {
    let o = cm2(&["genus1", "--D", "-15", "--precision", "28"]);
    assert!(o.status.success());
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "X^2 + 191025*X - 121287375");
}

#[test]
fn field_report() {
    let o = cm2(&["field", "--field", &f8_field()]);
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success());
    assert!(out.contains("s = 6"), "{out}");
    assert!(out.contains("definition degrees 3"), "{out}");
}

#[test]
fn bad_input_exits_with_one() {
    let o = cm2(&["field", "--field", "/nonexistent/k.field"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn low_precision_run_exits_with_two_and_writes_nothing() {
    let out = scratch("low");
    let cfg = manifest().join("configs/f8_low.conf");
    let o = cm2(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!out.exists());
}

#[test]
fn run_then_verify() {
    let out = scratch("run");
    let cfg = manifest().join("configs/f8.conf");
    let o = cm2(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["h1.txt", "g2.txt", "g3.txt", "log.txt", "timings.txt"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let art = out.to_str().unwrap();
    let o = cm2(&["verify", "--artifacts", art, "--p", "2111", "--field", &f8_field()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    // 47653 is inert in the real subfield: H1 does not split
    let o = cm2(&["verify", "--artifacts", art, "--p", "47653", "--field", &f8_field()]);
    assert_eq!(o.status.code(), Some(4));
    let o = cm2(&["recognize", "--invariants", "/nonexistent", "--degree", "6"]);
    assert_eq!(o.status.code(), Some(1));
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn shipped_configs_parse() {
    for e in std::fs::read_dir(manifest().join("configs")).unwrap() {
        let p = e.unwrap().path();
        let text = std::fs::read_to_string(&p).unwrap();
        let cfg = cm2::pipeline::parse_config(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        if let Some(f) = cfg.field {
            let k = std::fs::read_to_string(manifest().join("configs").join(f)).unwrap();
            cm2::cmfield::parse_field(&k).unwrap();
        }
    }
}
