use std::path::PathBuf;
use std::process::Command;

use ks_certify::harness::{read_csv, recertify, run, write_csv, RunConfig};
use ks_certify::stability::ConstantsTable;
use ks_certify::Error;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ks-certify-io-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn small(gamma: f64) -> RunConfig {
    RunConfig {
        dim: 1,
        n: 24,
        gamma,
        ..RunConfig::default()
    }
}

#[test]
fn csv_round_trip_and_recertify() {
    for gamma in [1.0, 1.5] {
        let rec = run(&small(gamma)).unwrap();
        let path = scratch(&format!("run-{gamma}.csv"));
        write_csv(&rec, std::fs::File::create(&path).unwrap()).unwrap();
        let stored = read_csv(&path).unwrap();
        assert_eq!(stored.dim, 1);
        assert_eq!(stored.gamma, gamma);
        assert_eq!(stored.z1, rec.z1);
        assert_eq!(stored.rows.len(), rec.rows.len());
        for (a, b) in stored.rows.iter().zip(&rec.rows) {
            assert_eq!((a.step, a.t, a.a, a.a1, a.a2, a.a3), (b.step, b.t, b.a, b.a1, b.a2, b.a3));
            assert_eq!((a.mass, a.min_rho, a.a_gamma, a.e), (b.mass, b.min_rho, b.a_gamma, b.e));
        }
        let again = recertify(&stored, &ConstantsTable::new(gamma, 1).unwrap()).unwrap();
        assert_eq!(again.certified_until, rec.report.certified_until);
        assert_eq!(again.covers_final_time, rec.report.covers_final_time);
    }
}

#[test]
fn config_text_errors_name_the_line() {
    let mut c = RunConfig::default();
    c.apply_text("# comment\ngamma = 2\n\nn = 64\n", None).unwrap();
    assert_eq!((c.gamma, c.n), (2.0, 64));
    let err = c.apply_text("dim = 2\nbogus = 1\n", None).unwrap_err();
    assert!(matches!(err, Error::Config(_)));
    assert!(err.to_string().contains('2'), "{err}");
    assert!(RunConfig { gamma: 0.5, ..RunConfig::default() }.validate().is_err());
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_ks-certify")).args(args).output().unwrap()
}

#[test]
fn cli_run_then_certify() {
    let out = scratch("cli.csv");
    let o = cli(&["run", "--dim", "1", "--n", "20", "--gamma", "1.5", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("certified until"));
    let o = cli(&["certify", "--input", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8(o.stdout).unwrap().contains("gamma               1.5"));
}

#[test]
fn cli_exit_codes() {
    assert_eq!(cli(&["run", "--gamma", "0.5"]).status.code(), Some(2));
    assert_eq!(
        cli(&["run", "--dim", "1", "--n", "200", "--tfinal", "50", "--steps", "1"]).status.code(),
        Some(3)
    );
    let o = cli(&["selftest", "--trials", "2000"]);
    assert_eq!(o.status.code(), Some(1));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("FAIL")).count(), 1, "{text}");
    assert!(text.lines().any(|l| l.starts_with("FAIL") && l.contains("constant 1)")));
}
