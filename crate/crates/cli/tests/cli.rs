use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_capacity-lab"))
}

fn scratch(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("capacity-lab-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn hash_line(o: &Output) -> String {
    stdout(o).lines().find(|l| l.starts_with("hash ")).unwrap().to_string()
}

const CANTOR: &str = r#"{"schema_version":1,"seed":11,"experiment":{"name":"cantor_scaling","n_min":1,"n_max":3,"iterations":2}}"#;

#[test]
fn list_and_describe() {
    let o = bin().arg("--list").output().unwrap();
    assert!(o.status.success());
    assert!(stdout(&o).lines().any(|l| l == "main_lemma_check"));
    let o = bin().args(["--describe", "main_lemma_check"]).output().unwrap();
    assert!(o.status.success());
    assert!(stdout(&o).contains("c²(μ) ≤ Σ_j c²(μ_j) + C‖μ‖"));
    let o = bin().args(["--describe", "no_such_thing"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn run_writes_csv_with_contract_columns() {
    let dir = scratch("cantor");
    let cfg = write(&dir, "cantor.json", CANTOR);
    let out = dir.join("out");
    let o = bin().args(["run", "--config"]).arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.extension().is_some_and(|e| e == "csv"))
        .unwrap();
    let text = std::fs::read_to_string(csv).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# {"));
    assert_eq!(lines.next().unwrap(), "n,c2,c2_over_n,lower_bound,bound_times_sqrt_n");
    assert_eq!(lines.count(), 3);
}

#[test]
fn rerun_reproduces_hash_and_seed_override_changes_it() {
    let dir = scratch("rerun");
    let cfg = write(
        &dir,
        "m.json",
        r#"{"schema_version":1,"seed":4,"threads":2,"experiment":{"name":"marcinkiewicz_check","trials":30}}"#,
    );
    let run = |extra: &[&str]| {
        bin().args(["run", "--config"]).arg(&cfg).arg("--out").arg(dir.join("out")).args(extra).output().unwrap()
    };
    let (a, b) = (run(&[]), run(&[]));
    assert!(a.status.success());
    assert_eq!(hash_line(&a), hash_line(&b));
    let c = run(&["--seed", "5"]);
    assert!(c.status.success());
    assert_ne!(hash_line(&a), hash_line(&c));
    assert!(stdout(&c).contains("_s5_"));
}

#[test]
fn config_errors_exit_2() {
    let dir = scratch("bad");
    let no_seed = write(&dir, "a.json", r#"{"schema_version":1,"experiment":{"name":"self_similarity"}}"#);
    let o = bin().args(["run", "--config"]).arg(&no_seed).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));

    let typo = write(&dir, "b.json", "{\"schema_version\":1,\"seed\":1,\n\"experiment\":{\"name\":\"self_similarity\",\"nmax\":1}}");
    let o = bin().args(["run", "--config"]).arg(&typo).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    let o = bin().args(["run", "--config"]).arg(dir.join("missing.json")).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = bin().arg("run").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = bin().output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn band_failure_exits_1() {
    let dir = scratch("fail");
    // a one-disc prefix has ρ = 0, so any later growth breaks the ratio band
    let cfg = write(
        &dir,
        "c.json",
        r#"{"schema_version":1,"seed":1,"experiment":{"name":"main_lemma_check","trials":1,"sizes":[1,3],"atoms":4}}"#,
    );
    let o = bin().args(["run", "--config"]).arg(&cfg).arg("--out").arg(dir.join("out")).output().unwrap();
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("FAIL max_rho_over_first"));
}
