use std::fs;
use std::path::Path;
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_rasm");

fn write_spec(dir: &Path, body: &str) -> std::path::PathBuf {
    let p = dir.join("run.toml");
    fs::write(&p, body).unwrap();
    p
}

const SIMULATE: &str = r#"
mode = "simulate"
trials = 2000
seed = 3

[grid]
start = -4
stop = 4
step = 4

[[scheme]]
scheme = "RASM"
n_res = 8
n_rx = 4
order = 2
"#;

#[test]
fn simulate_writes_a_deterministic_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_spec(dir.path(), SIMULATE);
    let run = |out: &str, threads: &str| {
        let status = Command::new(BIN)
            .args(["--config", cfg.to_str().unwrap(), "--out"])
            .arg(dir.path().join(out))
            .env("RASM_THREADS", threads)
            .status()
            .unwrap();
        assert!(status.success());
        fs::read_to_string(dir.path().join(out).join("RASM_ber.csv")).unwrap()
    };
    let a = run("a", "1");
    let b = run("b", "2");
    assert_eq!(a, b);
    let lines: Vec<&str> = a.lines().collect();
    assert_eq!(lines[0], "snr_db,ber,ci95,trials");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("-4,"));
    assert!(lines[3].ends_with(",2000"));
}

#[test]
fn analyze_columns_are_non_increasing() {
    let dir = tempfile::tempdir().unwrap();
    let body = SIMULATE
        .replace("start = -4", "start = -10")
        .replace("stop = 4", "stop = 10")
        .replace("step = 4", "step = 2")
        .replace("n_res = 8", "n_res = 16");
    let cfg = write_spec(dir.path(), &body);
    let out = dir.path().join("out");
    let status = Command::new(BIN)
        .args(["--config", cfg.to_str().unwrap(), "--mode", "analyze", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(out.join("RASM_aber.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("snr_db,aber_bound"));
    let values: Vec<f64> = lines
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values.len(), 11);
    assert!(values.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn compare_reports_equal_bpcu() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"
mode = "compare"
trials = 500

[grid]
start = 0
stop = 4
step = 4

[[scheme]]
scheme = "RASM"
n_res = 8
n_rx = 5
order = 2

[[scheme]]
scheme = "RSM"
n_res = 8
n_rx = 16
order = 2

[[scheme]]
scheme = "RGSM"
n_s = 3
n_res = 8
n_rx = 6
order = 2

[[scheme]]
scheme = "RGSSK"
n_s = 3
n_res = 8
n_rx = 7
order = 2
"#;
    let cfg = write_spec(dir.path(), body);
    let out = dir.path().join("cmp");
    let status = Command::new(BIN)
        .args(["--config", cfg.to_str().unwrap(), "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let bpcu = fs::read_to_string(out.join("bpcu.csv")).unwrap();
    assert_eq!(bpcu, "quantity,RASM,RSM,RGSM,RGSSK\nbpcu,5,5,5,5\n");
    let cmp = fs::read_to_string(out.join("compare_ber.csv")).unwrap();
    assert!(cmp.starts_with("snr_db,RASM,RSM,RGSM,RGSSK\n"));
    assert_eq!(cmp.lines().count(), 3);
}

#[test]
fn errors_give_non_zero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_spec(dir.path(), &SIMULATE.replace("order = 2", "order = 3"));
    let out = Command::new(BIN)
        .args(["--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("modulation order must be a power of 2"), "{err}");
    assert!(err.contains("line 15"), "{err}");

    // output path occupied by a regular file
    let good = write_spec(dir.path(), SIMULATE);
    let blocker = dir.path().join("blocker");
    fs::write(&blocker, "x").unwrap();
    let status = Command::new(BIN)
        .args(["--config", good.to_str().unwrap(), "--trials", "10", "--out"])
        .arg(&blocker)
        .status()
        .unwrap();
    assert!(!status.success());

    let status = Command::new(BIN)
        .args(["--config", dir.path().join("missing.toml").to_str().unwrap()])
        .status()
        .unwrap();
    assert!(!status.success());
}

#[test]
fn flags_override_the_run_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_spec(dir.path(), SIMULATE);
    let out = dir.path().join("o");
    let status = Command::new(BIN)
        .args(["--config", cfg.to_str().unwrap(), "--trials", "7", "--seed", "11", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(out.join("RASM_ber.csv")).unwrap();
    assert!(text.lines().skip(1).all(|l| l.ends_with(",7")));
}
