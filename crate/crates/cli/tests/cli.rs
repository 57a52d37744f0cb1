use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const HOFSTADTER: &str = r#"
[model]
kind = "hofstadter"
half_width = 8
flux_p = 1
flux_q = 3
"#;

fn roelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_roelab")).args(args).output().expect("spawn roelab")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn run_config(sub: &str, config: &Path) -> Output {
    roelab(&[sub, config.to_str().unwrap()])
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn manifest(dir: &Path, sub: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(format!("manifest-{sub}.json"))).unwrap()).unwrap()
}

fn assert_rows_tagged(dir: &Path, sub: &str) {
    let m = manifest(dir, sub);
    let hash = m["run_hash"].as_str().unwrap();
    for a in m["artifacts"].as_array().unwrap() {
        let name = a["path"].as_str().unwrap();
        let text = fs::read_to_string(dir.join(name)).unwrap();
        if name.ends_with(".csv") {
            let mut lines = text.lines();
            assert!(lines.next().unwrap().starts_with("run,"), "{name}");
            for l in lines {
                assert_eq!(l.split(',').next().unwrap(), hash, "{name}");
            }
        } else if name.ends_with(".jsonl") {
            for l in text.lines() {
                let v: Value = serde_json::from_str(l).unwrap();
                assert_eq!(v["run"], hash, "{name}");
            }
        }
    }
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn ktable_matches_golden() {
    let tmp = tempfile::tempdir().unwrap();
    let out = roelab(&["ktable", "--field", "complex", "--dmax", "4", "--out", tmp.path().to_str().unwrap()]);
    assert!(out.status.success());
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let text = fs::read_to_string(tmp.path().join("ktable.txt")).unwrap();
    assert_eq!(text, fs::read_to_string(golden.join("ktable.txt")).unwrap());
    assert!(stdout(&out).contains(text.trim_end()));

    let csv = fs::read_to_string(tmp.path().join("ktable.csv")).unwrap();
    let stripped: String = csv.lines().map(|l| format!("{}\n", l.split_once(',').unwrap().1)).collect();
    assert_eq!(stripped, fs::read_to_string(golden.join("ktable.csv")).unwrap());
    assert_rows_tagged(tmp.path(), "ktable");
}

#[test]
fn ktable_rejects_unknown_field() {
    let out = roelab(&["ktable", "--field", "quaternionic"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn pair_reports_converged_index_for_hofstadter() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "pair.toml",
        &format!("{HOFSTADTER}\n[pairing]\nfermi_energy = 2.634\nladder = [8, 12]\n\n[output]\ndir = \"out\"\n"),
    );
    let out = run_config("pair", &cfg);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("index = 1 (converged)"), "{}", stdout(&out));
    let dir = tmp.path().join("out");
    assert_rows_tagged(&dir, "pair");
    let m = manifest(&dir, "pair");
    assert_eq!(m["subcommand"], "pair");
    assert_eq!(m["artifacts"].as_array().unwrap().len(), 3);
}

fn sweep_config(dir: &Path, seeds: &str) -> PathBuf {
    write_config(
        dir,
        "sweep.toml",
        &format!(
            "{HOFSTADTER}\n[pairing]\nfermi_energy = 2.634\nladder = [8, 12]\noracle = false\n\n\
             [sweep]\nstrengths = [0.0]\nseeds = {seeds}\n\n[output]\ndir = \"out\"\n"
        ),
    )
}

#[test]
fn clean_sweep_is_seed_independent_and_order_invariant() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let out_a = run_config("sweep", &sweep_config(a.path(), "[1, 2, 3, 4, 5]"));
    let out_b = run_config("sweep", &sweep_config(b.path(), "[4, 2, 5, 1, 3, 2]"));
    assert!(out_a.status.success(), "{}", String::from_utf8_lossy(&out_a.stderr));
    assert!(out_b.status.success());
    assert_eq!(stdout(&out_a), stdout(&out_b));

    let dir_a = a.path().join("out");
    let mut rdr = csv::Reader::from_path(dir_a.join("sweep.csv")).unwrap();
    let idx = rdr.headers().unwrap().iter().position(|h| h == "index").unwrap();
    let indices: Vec<String> = rdr.records().map(|r| r.unwrap()[idx].to_string()).collect();
    assert_eq!(indices, vec!["1"; 5]);
    assert_rows_tagged(&dir_a, "sweep");

    let strip_config_path = |files: Vec<(String, Vec<u8>)>| -> Vec<(String, Vec<u8>)> {
        files.into_iter().filter(|(n, _)| !n.starts_with("manifest")).collect()
    };
    assert_eq!(strip_config_path(read_all(&dir_a)), strip_config_path(read_all(&b.path().join("out"))));
    assert_eq!(manifest(&dir_a, "sweep")["run_hash"], manifest(&b.path().join("out"), "sweep")["run_hash"]);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let body = |dir: &str| {
        format!(
            "[untwist]\ncocycle = \"magnetic\"\nflux = 2.0943951023931953\nhalf_width = 2\nsamples = 200\nseed = 9\n\n\
             [output]\ndir = \"{dir}\"\n"
        )
    };
    let first = run_config("untwist", &write_config(tmp.path(), "a.toml", &body("one")));
    let second = run_config("untwist", &write_config(tmp.path(), "b.toml", &body("two")));
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    assert_eq!(stdout(&first), stdout(&second));
    let strip = |files: Vec<(String, Vec<u8>)>| -> Vec<(String, Vec<u8>)> {
        files.into_iter().filter(|(n, _)| !n.starts_with("manifest")).collect()
    };
    let one = tmp.path().join("one");
    assert_eq!(strip(read_all(&one)), strip(read_all(&tmp.path().join("two"))));
    assert_rows_tagged(&one, "untwist");
}

#[test]
fn unknown_key_exits_with_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad.toml", &format!("{HOFSTADTER}flux_r = 2\n"));
    let out = run_config("build", &cfg);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("flux_r"));
}

#[test]
fn closed_gap_exits_with_precondition_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "gap.toml",
        &format!(
            "{HOFSTADTER}\n[disorder]\npotential = 20.0\nseed = 1\n\n[pairing]\nfermi_energy = 2.634\nladder = [8, 12]\n\n\
             [output]\ndir = \"out\"\n"
        ),
    );
    let out = run_config("pair", &cfg);
    assert_eq!(out.status.code(), Some(3), "{}", stdout(&out));
}

#[test]
fn single_window_ladder_exits_unconverged() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "one.toml",
        &format!("{HOFSTADTER}\n[pairing]\nfermi_energy = 2.634\nladder = [8]\noracle = false\n\n[output]\ndir = \"out\"\n"),
    );
    let out = run_config("pair", &cfg);
    assert_eq!(out.status.code(), Some(4));
    assert!(stdout(&out).contains("index = 1 (not converged)"), "{}", stdout(&out));
    assert!(String::from_utf8_lossy(&out.stderr).contains("did not settle"));
}
