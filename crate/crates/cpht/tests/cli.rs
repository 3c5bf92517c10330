use std::process::Command;

fn cpht(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_cpht")).args(args).output().expect("binary runs")
}

#[test]
fn gen_trace_then_replay() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.bin");
    let p = path.to_str().unwrap();
    let out = cpht(&["gen-trace", "--out", p, "--distinct", "3000", "--total", "9000", "--key-bits", "24"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv_path = dir.path().join("rows.csv");
    let out = cpht(&[
        "trace", "--trace", p, "--key-bits", "24", "--addr-bits", "9", "--bucket-slots", "16", "--ratio", "0.5",
        "--ratio", "1", "--verify", "--csv", csv_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_path(&csv_path).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(&rows[1][7], "trace");
    assert_eq!(&rows[1][13], "9000");
}

#[test]
fn put_and_find_to_stdout() {
    for cmd in ["put", "find", "fop"] {
        let out = cpht(&[
            cmd, "--scheme", "cuckoo", "--addr-bits", "8", "--bucket-slots", "16", "--key-bits", "24", "--fill", "0.7",
            "--before", "0.3", "--ratio", "0.5", "--trials", "2", "--verify",
        ]);
        assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        let text = String::from_utf8(out.stdout).unwrap();
        assert_eq!(text.lines().count(), 3, "{text}");
        assert!(text.lines().nth(1).unwrap().starts_with("cuckoo,8,16,32,,,24,"));
    }
}

#[test]
fn config_errors_exit_nonzero() {
    let out = cpht(&["put", "--addr-bits", "10"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("remainder bits"));

    let out = cpht(&["fop", "--key-bits", "24", "--addr-bits", "9", "--before", "0.9", "--fill", "0.5"]);
    assert!(!out.status.success());

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.bin");
    std::fs::write(&bad, b"NOTATRACE0000000").unwrap();
    let out = cpht(&["trace", "--trace", bad.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("offset 0"));
}
