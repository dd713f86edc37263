use std::io::Write;
use std::process::{Command, Stdio};

use clap::Parser;
use yggsum_cli::{run, Cli, Status};

fn invoke(args: &[&str]) -> (Status, String) {
    let cli = Cli::try_parse_from(std::iter::once("yggsum").chain(args.iter().copied())).unwrap();
    let mut out = Vec::new();
    let status = run(&cli, &mut out);
    (status, String::from_utf8(out).unwrap())
}

fn trace(args: &[&str], script: &str) -> (i32, String) {
    let mut child = Command::new(env!("CARGO_BIN_EXE_yggsum"))
        .arg("trace")
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(script.as_bytes())
        .unwrap();
    let out = child.wait_with_output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
    )
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn verify_nmtree_passes() {
    let (status, out) = invoke(&[
        "verify",
        "--structure",
        "nmtree",
        "--N",
        "64",
        "--M",
        "7",
        "--iota",
        "1",
        "--ops",
        "10000",
        "--seed",
        "1",
    ]);
    assert_eq!(status, Status::Pass, "{out}");
    let rows = csv_rows(&out);
    let names: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    for suite in [
        "oracle-equivalence",
        "variant-agreement",
        "model-cost",
        "semantic-invariant",
        "sum-table",
        "lane-arithmetic",
    ] {
        assert!(names.contains(&suite), "missing {suite}");
    }
    assert!(rows.iter().all(|r| r[1] == "pass" && r[2] != "0"));
}

#[test]
fn verify_reports_construction_error() {
    let (status, out) = invoke(&[
        "verify",
        "--structure",
        "nmtree",
        "--N",
        "16",
        "--M",
        "256",
        "--iota",
        "0",
        "--table-cap",
        "24",
    ]);
    assert_eq!(status, Status::Usage);
    assert!(out.contains("construction,error"), "{out}");
    assert!(out.contains("32") && out.contains("24"), "{out}");
}

#[test]
fn verify_zero_ops_is_empty_pass() {
    let (status, out) = invoke(&["verify", "--ops", "0"]);
    assert_eq!(status, Status::Pass);
    assert_eq!(out, "suite,status,checks,counterexample\n");
    let (status, out) = invoke(&["verify", "--ops", "0", "--format", "json"]);
    assert_eq!(status, Status::Pass);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["suites"].as_array().unwrap().len(), 0);
}

#[test]
fn verify_every_structure() {
    for s in ["nmtree", "fenwick", "oracle", "binset"] {
        let (status, out) = invoke(&[
            "verify",
            "--structure",
            s,
            "--N",
            "37",
            "--M",
            "10",
            "--ops",
            "3000",
            "--seed",
            "4",
        ]);
        assert_eq!(status, Status::Pass, "{s}: {out}");
    }
}

#[test]
fn verify_is_deterministic() {
    let args = [
        "verify",
        "--structure",
        "binset",
        "--N",
        "50",
        "--M",
        "9",
        "--ops",
        "2000",
        "--seed",
        "77",
        "--format",
        "json",
    ];
    assert_eq!(invoke(&args), invoke(&args));
    let bench = ["bench", "--N", "4,64", "--no-timing"];
    assert_eq!(invoke(&bench), invoke(&bench));
}

#[test]
fn bench_model_costs() {
    let (status, out) = invoke(&[
        "bench",
        "--N",
        "4,16,64,1024",
        "--ops",
        "2000",
        "--no-timing",
    ]);
    assert_eq!(status, Status::Pass);
    let rows = csv_rows(&out);
    assert!(!rows.is_empty());
    for r in &rows {
        assert_eq!(r.len(), 8);
        match r[4].as_str() {
            "update" => assert_eq!((&r[5][..], &r[6][..]), ("1", "1"), "{r:?}"),
            "retrieve" => assert_eq!((&r[5][..], &r[6][..]), ("1", "0"), "{r:?}"),
            other => panic!("unexpected op {other}"),
        }
    }
    for n in ["4", "16", "64", "1024"] {
        assert!(rows.iter().any(|r| r[1] == n));
    }

    let (_, out) = invoke(&[
        "bench",
        "--structure",
        "fenwick",
        "--N",
        "4,64,4096",
        "--no-timing",
    ]);
    let reads: Vec<u64> = csv_rows(&out)
        .iter()
        .filter(|r| r[4] == "update")
        .map(|r| r[5].parse().unwrap())
        .collect();
    // Worst case over sampled indices: grows with lg N, never above lg N + 1.
    assert!(reads.windows(2).all(|w| w[0] < w[1]), "{reads:?}");
    assert!(
        reads
            .iter()
            .zip([3, 7, 13])
            .all(|(&r, cap)| r <= cap && r + 2 >= cap),
        "{reads:?}"
    );
}

#[test]
fn bench_rejects_bad_iota() {
    let (status, out) = invoke(&[
        "bench",
        "--N",
        "16",
        "--M",
        "256",
        "--iota",
        "0",
        "--table-cap",
        "24",
    ]);
    assert_eq!(status, Status::Usage);
    assert!(out.is_empty());
}

#[test]
fn trace_update_first_position() {
    let (code, out) = trace(&["--N", "4", "--M", "8"], "update 0 3\n");
    assert_eq!(code, 0);
    let after = out.split("= ok\n").nth(1).unwrap();
    assert_eq!(after, "4 8 1 0\nnu[1] = 3\nnu[2] = 3\nnu[3] = 0\n");
}

#[test]
fn trace_update_last_position() {
    let (code, out) = trace(&["--N", "4", "--M", "8"], "update 3 5\nretrieve 3\n");
    assert_eq!(code, 0);
    assert!(
        out.contains("> update 3 5\n= ok\n4 8 1 5\nnu[1] = 0\nnu[2] = 0\nnu[3] = 0\n"),
        "{out}"
    );
    assert!(out.contains("> retrieve 3\n= 5\n"));
}

#[test]
fn trace_empty_script() {
    let (code, out) = trace(&["--N", "4", "--M", "8"], "");
    assert_eq!(code, 0);
    assert_eq!(out, "4 8 1 0\nnu[1] = 0\nnu[2] = 0\nnu[3] = 0\n");
}

#[test]
fn trace_parse_error_exits_2() {
    let (code, out) = trace(&[], "retrieve 0\nupdate x 1\n");
    assert_eq!(code, 2);
    assert!(out.is_empty());
}

#[test]
fn trace_binset_and_unsupported_ops() {
    let (code, out) = trace(
        &["--structure", "binset", "--M", "100"],
        "insert 5 2\ninsert 1 3\nrange 0 9\ndelete 5\nretrieve 9\n",
    );
    assert_eq!(code, 0);
    assert!(out.contains("> range 0 9\n= 5\n"));
    assert!(out.ends_with("= 3\n1 0\na[1] = 3\n"), "{out}");
    let (code, _) = trace(&[], "insert 1 1\n");
    assert_eq!(code, 2);
}
