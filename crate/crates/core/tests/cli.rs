use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rug::Rational;

use slopelab::record::record_file_name;
use slopelab::slopes::{compute_record, record_from_tp_slopes};
use slopelab::store::{ResultStore, MANIFEST_NAME};

fn slopelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slopelab"))
        .args(args)
        .env_remove("SLOPELAB_STORE")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

#[test]
fn compute_outputs() {
    let o = slopelab(&["compute", "--prime", "79", "--weight", "38"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("slopes: 0, 1\n"), "{text}");
    assert!(text.contains("exceptional: 1\n"));

    let o = slopelab(&["compute", "--prime", "59", "--weight", "12"]);
    assert!(stdout(&o).contains("slopes: 0\n"));

    let o = slopelab(&["compute", "--prime", "79", "--weight", "116", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["tp_slopes"][1], serde_json::json!({"num": 1, "den": 2, "mult": 2}));
    assert_eq!(v["fractional"], serde_json::json!([{"num": 1, "den": 2}, {"num": 1, "den": 2}]));
}

#[test]
fn exit_codes() {
    assert_eq!(slopelab(&[]).status.code(), Some(1));
    assert_eq!(slopelab(&["--version"]).status.code(), Some(0));
    assert_eq!(slopelab(&["compute", "--prime", "79", "--weight", "39"]).status.code(), Some(1));
    let o = slopelab(&["compute", "--prime", "79", "--weight", "39"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("odd"));
    assert_eq!(slopelab(&["compute", "--prime", "1", "--weight", "12"]).status.code(), Some(1));
    assert_eq!(slopelab(&["compute", "--prime", "7", "--weight", "12", "--json", "--text"]).status.code(), Some(1));
    assert_eq!(slopelab(&["sweep", "--primes", "3..2", "--weights", "12..14", "--out", "/tmp/x"]).status.code(), Some(1));
    assert_eq!(slopelab(&["verify", "--store", "/nonexistent/slopelab"]).status.code(), Some(1));
    assert_eq!(slopelab(&["exceptions"]).status.code(), Some(1));
}

#[test]
fn sweep_enumerates_even_weights() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = slopelab(&["sweep", "--primes", "2..3", "--weights", "12..28", "--out", out, "--workers", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("odd weight"));
    let files = snapshot(dir.path());
    assert_eq!(files.len(), 19);
    for p in [2, 3] {
        for k in (12..=28).step_by(2) {
            assert!(files.contains_key(&record_file_name(p, k)));
        }
    }
}

#[test]
fn sweep_is_deterministic_across_worker_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = |dir: &Path, w: &'static str| {
        slopelab(&["sweep", "--primes", "2..13", "--weights", "12..72", "--out", dir.to_str().unwrap(), "--workers", w])
    };
    assert_eq!(args(a.path(), "1").status.code(), Some(0));
    assert_eq!(args(b.path(), "4").status.code(), Some(0));
    assert_eq!(snapshot(a.path()), snapshot(b.path()));
}

#[test]
fn resume_leaves_current_records_untouched() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let sweep = || slopelab(&["sweep", "--primes", "5..7", "--weights", "12..60", "--out", out]);
    assert_eq!(sweep().status.code(), Some(0));
    let before = snapshot(dir.path());

    let victim = dir.path().join(record_file_name(5, 40));
    let corrupted = dir.path().join(record_file_name(7, 24));
    fs::remove_file(&victim).unwrap();
    fs::write(&corrupted, b"{\"garbage\": true}\n").unwrap();
    let untouched = dir.path().join(record_file_name(5, 60));
    let mtime = fs::metadata(&untouched).unwrap().modified().unwrap();

    let o = sweep();
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("computed 2, skipped 48"), "{}", stdout(&o));
    assert_eq!(snapshot(dir.path()), before);
    assert_eq!(fs::metadata(&untouched).unwrap().modified().unwrap(), mtime);

    let again = sweep();
    assert!(stdout(&again).starts_with("computed 0, skipped 50"));
}

#[test]
fn manifest_summarises_exceptional_weights() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = slopelab(&["sweep", "--primes", "59..59", "--weights", "12..166", "--out", out]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("exceptional weights p=59: 16, 46, 76, 106, 136, 166\n"));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join(MANIFEST_NAME)).unwrap()).unwrap();
    assert_eq!(manifest["exceptional_weights"]["59"], serde_json::json!([16, 46, 76, 106, 136, 166]));
    assert_eq!(manifest["records"].as_object().unwrap().len(), 78);

    let ex = slopelab(&["exceptions", "--store", out]);
    assert!(stdout(&ex).contains("p=59 k=136 exceptional: 3\n"));
    let trains = slopelab(&["trains", "--store", out]);
    assert!(stdout(&trains).contains("p=59 k=136 slope 3 complete: 134:3/2 ok, 132:1/2 ok\n"), "{}", stdout(&trains));

    let theta = slopelab(&["theta", "--prime", "59", "--seed", "16", "--max", "166", "--store", out]);
    assert_eq!(theta.status.code(), Some(0));
    assert!(stdout(&theta).contains("k=76 predicted 2: match\n"));
    assert!(stdout(&theta).contains("weights: 16, 46, 76, 106, 136, 166\n"));
}

#[test]
fn verify_and_env_store() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_slopelab"))
        .args(["sweep", "--primes", "79..79", "--weights", "38..44"])
        .env("SLOPELAB_STORE", out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    {
        let mut store = ResultStore::open(dir.path()).unwrap();
        for k in [116, 118, 122, 124] {
            store.put(&compute_record(79, k).unwrap()).unwrap();
        }
    }
    let v = Command::new(env!("CARGO_BIN_EXE_slopelab")).arg("verify").env("SLOPELAB_STORE", out).output().unwrap();
    let text = stdout(&v);
    assert_eq!(v.status.code(), Some(0), "{text}");
    for k in [38, 44, 116, 118, 122, 124] {
        assert!(text.contains(&format!("PASS     p=79 k={k} slope sequence\n")), "{text}");
    }
    assert!(text.contains("MISSING  p=79 k=196 slope sequence\n"));
    assert!(text.contains("failed 0"));

    // A record disagreeing with the reference table is a mismatch.
    let mut store = ResultStore::open(dir.path()).unwrap();
    store.put(&record_from_tp_slopes(79, 38, vec![Rational::from(0), Rational::from(2)])).unwrap();
    let v = slopelab(&["verify", "--store", out]);
    assert_eq!(v.status.code(), Some(3));
    assert!(stdout(&v).contains("FAIL     p=79 k=38 slope sequence (got 0, 2)\n"));

    // A record edited behind the manifest's back is a storage failure.
    fs::write(dir.path().join(record_file_name(79, 44)), "{}").unwrap();
    assert_eq!(slopelab(&["verify", "--store", out]).status.code(), Some(2));
}

#[test]
fn distribution_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(slopelab(&["sweep", "--primes", "79..79", "--weights", "12..60", "--out", out]).status.code(), Some(0));
    let csv_path = dir.path().join("dist.csv");
    let o = slopelab(&[
        "distribution", "--store", out, "--prime", "79", "--bins", "80", "--out", csv_path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(&csv_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("bin_lo,bin_hi,mass_num,mass_den,mass_decimal"));
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    assert_eq!(rows.len(), 80);
    assert_eq!(rows[0][0], "0");
    assert_eq!(rows[79][1], "1");
    let total = rows.iter().fold(Rational::new(), |acc, r| {
        acc + Rational::from((r[2].parse::<i64>().unwrap(), r[3].parse::<i64>().unwrap()))
    });
    assert_eq!(total, 1);
    assert_eq!(
        slopelab(&["distribution", "--store", out, "--prime", "79", "--bins", "0", "--out", "/tmp/x.csv"]).status.code(),
        Some(1)
    );
}
