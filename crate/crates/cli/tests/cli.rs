//! End-to-end CLI contract: exit codes, report contents, determinism.

use std::fs;
use std::path::Path;
use std::process::Command;

fn run(args: &[&str]) -> (i32, String, String) {
    let output = Command::new(env!("CARGO_BIN_EXE_ksdrift"))
        .args(args)
        .output()
        .expect("spawn ksdrift");
    (
        output.status.code().expect("exit code"),
        String::from_utf8_lossy(&output.stdout).into_owned(),
        String::from_utf8_lossy(&output.stderr).into_owned(),
    )
}

fn write(dir: &Path, name: &str, content: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, content).unwrap();
    path.display().to_string()
}

fn lines_of(values: impl IntoIterator<Item = f64>) -> String {
    values
        .into_iter()
        .map(|v| format!("{v}\n"))
        .collect::<String>()
}

fn strip_timing(report: &str) -> String {
    report
        .lines()
        .filter(|l| !l.starts_with("timing."))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn one_sample_example_report() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "d.txt", "0.25\n0.75\n");
    let (code, stdout, _) = run(&["test", "one-sample", "--f0", "uniform01", &data]);
    assert_eq!(code, 0);
    assert!(stdout.contains("verdict.d_stat = 0.25"));
    assert!(stdout.contains("verdict.reject = false"));
    assert!(stdout.contains("report = ksdrift.test.one-sample.v1"));
}

#[test]
fn two_sample_identical_files_keep_null() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.txt", &lines_of((0..50).map(f64::from)));
    let b = write(dir.path(), "b.txt", &lines_of((0..50).map(f64::from)));
    let (code, stdout, _) = run(&["test", "two-sample", "--x", &a, "--y", &b]);
    assert_eq!(code, 0);
    assert!(stdout.contains("verdict.d_stat = 0"));
    assert!(stdout.contains("verdict.reject = false"));
}

#[test]
fn two_sample_separated_files_reject() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.txt", &lines_of((0..80).map(f64::from)));
    let b = write(
        dir.path(),
        "b.txt",
        &lines_of((0..80).map(|i| f64::from(i) + 1000.0)),
    );
    let (code, stdout, _) = run(&["test", "two-sample", "--x", &a, "--y", &b]);
    assert_eq!(code, 1);
    assert!(stdout.contains("verdict.d_stat = 1"));
    assert!(stdout.contains("verdict.reject = true"));
}

#[test]
fn transform_large_ratio_warns_with_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let reference = write(dir.path(), "ref.txt", &lines_of((0..100).map(f64::from)));
    let comparison = write(
        dir.path(),
        "cmp.txt",
        &lines_of((0..50).map(|i| f64::from(i) * 2.0)),
    );
    let (_, stdout, _) = run(&[
        "test",
        "transform",
        "--reference",
        &reference,
        "--comparison",
        &comparison,
    ]);
    assert!(stdout.contains("transform.ratio = 0.5"));
    assert!(stdout.contains("transform.ratio_warning = true"));
    let warning = stdout
        .lines()
        .find(|l| l.starts_with("warning."))
        .expect("a ratio warning line");
    assert!(warning.contains("0.2"), "warning must name the threshold");
}

#[test]
fn transform_without_seed_reports_one() {
    let dir = tempfile::tempdir().unwrap();
    let reference = write(dir.path(), "ref.txt", &lines_of((0..200).map(f64::from)));
    let comparison = write(dir.path(), "cmp.txt", &lines_of((0..20).map(f64::from)));
    let (_, stdout, _) = run(&[
        "test",
        "transform",
        "--reference",
        &reference,
        "--comparison",
        &comparison,
        "--dither",
    ]);
    let seed_line = stdout
        .lines()
        .find(|l| l.starts_with("transform.seed_used = "))
        .expect("a seed line");
    let seed = seed_line.trim_start_matches("transform.seed_used = ");
    assert!(seed.parse::<u64>().is_ok(), "seed line: {seed_line}");
}

#[test]
fn missing_file_exits_2_with_path() {
    let (code, _, stderr) = run(&["test", "one-sample", "--f0", "uniform01", "/no/such/file"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("/no/such/file"));
}

#[test]
fn bad_token_exits_3_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "d.txt", "1.0\nnot-a-number\n");
    let (code, _, stderr) = run(&["test", "one-sample", "--f0", "uniform01", &data]);
    assert_eq!(code, 3);
    assert!(stderr.contains(":2:"), "stderr: {stderr}");
}

#[test]
fn skip_policy_reports_count() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "d.txt", "0.25\nbogus\n0.75\n");
    let (code, stdout, _) = run(&[
        "test",
        "one-sample",
        "--f0",
        "uniform01",
        "--missing",
        "skip",
        &data,
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("inputs.data.skipped = 1"));
    assert!(stdout.contains("warning.0 = skipped 1 non-numeric token(s)"));
}

#[test]
fn usage_errors_exit_64() {
    // Unknown flag.
    let (code, _, _) = run(&["test", "one-sample", "--wat"]);
    assert_eq!(code, 64);
    // Missing required flag.
    let (code, _, _) = run(&["build", "whatever.txt"]);
    assert_eq!(code, 64);
    // Transform without any reference source.
    let dir = tempfile::tempdir().unwrap();
    let cmp = write(dir.path(), "c.txt", "1\n");
    let (code, _, stderr) = run(&["test", "transform", "--comparison", &cmp]);
    assert_eq!(code, 64);
    assert!(stderr.contains("--reference"));
    // Replication floor.
    let (code, _, stderr) = run(&[
        "simulate",
        "--n",
        "50",
        "--m",
        "20",
        "--reps",
        "50",
        "--seed",
        "1",
        "--mu-grid",
        "0",
    ]);
    assert_eq!(code, 64);
    assert!(stderr.contains("at least 100"), "stderr: {stderr}");
    // Bad alpha.
    let data = write(dir.path(), "d.txt", "0.5\n");
    let (code, _, _) = run(&[
        "test",
        "one-sample",
        "--f0",
        "uniform01",
        "--alpha",
        "1.5",
        &data,
    ]);
    assert_eq!(code, 64);
    // --column with lines format.
    let (code, _, _) = run(&[
        "test",
        "one-sample",
        "--f0",
        "uniform01",
        "--column",
        "v",
        &data,
    ]);
    assert_eq!(code, 64);
}

#[test]
fn help_exits_zero() {
    let (code, stdout, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("ksdrift"));
}

#[test]
fn build_persists_merged_partitions() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.txt", "1\n3\n");
    let b = write(dir.path(), "b.txt", "2\n");
    let out = dir.path().join("ref.ecdf");
    let (code, stdout, _) = run(&["build", "--out", out.to_str().unwrap(), &a, &b]);
    assert_eq!(code, 0);
    assert!(stdout.contains("n = 3"));
    assert!(stdout.contains("partitions = 2"));
    let content = fs::read_to_string(&out).unwrap();
    assert_eq!(content, "ecdf v1 n=3\n1\n2\n3\n");
}

#[test]
fn build_reads_csv_column() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.csv", "name,value\nfoo,2.5\nbar,1.5\n");
    let out = dir.path().join("ref.ecdf");
    let (code, _, _) = run(&[
        "build",
        "--format",
        "csv",
        "--column",
        "value",
        "--out",
        out.to_str().unwrap(),
        &a,
    ]);
    assert_eq!(code, 0);
    assert_eq!(fs::read_to_string(&out).unwrap(), "ecdf v1 n=2\n1.5\n2.5\n");
}

#[test]
fn build_csv_skip_policy_reports_count() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.csv", "v\n1.5\noops\n2.5\n");
    let out = dir.path().join("ref.ecdf");
    let (code, stdout, _) = run(&[
        "build",
        "--format",
        "csv",
        "--column",
        "v",
        "--missing",
        "skip",
        "--out",
        out.to_str().unwrap(),
        &a,
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("skipped = 1"));
    assert!(stdout.contains("warning.0 = skipped 1 non-numeric token(s) during ingest"));
    assert_eq!(fs::read_to_string(&out).unwrap(), "ecdf v1 n=2\n1.5\n2.5\n");
}

#[test]
fn simulate_null_rate_is_calibrated() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("null.csv");
    let (code, _, _) = run(&[
        "simulate",
        "--mu-grid",
        "0",
        "--methods",
        "two_sample",
        "--reps",
        "10000",
        "--n",
        "100",
        "--m",
        "100",
        "--seed",
        "7",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let csv = fs::read_to_string(&out).unwrap();
    let row = csv.lines().nth(1).expect("one data row");
    let rate: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
    assert!(
        (0.040..=0.060).contains(&rate),
        "null rejection rate {rate}"
    );
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn persisted_reference_matches_raw_reference() {
    let dir = tempfile::tempdir().unwrap();
    let values: Vec<f64> = (0..500)
        .map(|i| (f64::from(i) * 0.377).sin() * 10.0)
        .collect();
    let reference = write(dir.path(), "ref.txt", &lines_of(values.iter().copied()));
    let comparison = write(
        dir.path(),
        "cmp.txt",
        &lines_of((0..40).map(|i| (f64::from(i) * 0.73).cos() * 10.0)),
    );
    let out = dir.path().join("ref.ecdf");
    let (code, _, _) = run(&["build", "--out", out.to_str().unwrap(), &reference]);
    assert_eq!(code, 0);

    let common = [
        "--comparison",
        &comparison,
        "--dither",
        "--seed",
        "42",
        "--alpha",
        "0.05",
    ];
    let mut via_raw = vec!["test", "transform", "--reference", &reference];
    via_raw.extend_from_slice(&common);
    let mut via_file = vec![
        "test",
        "transform",
        "--reference-ecdf",
        out.to_str().unwrap(),
    ];
    via_file.extend_from_slice(&common);

    let (code_raw, out_raw, _) = run(&via_raw);
    let (code_file, out_file, _) = run(&via_file);
    assert_eq!(code_raw, code_file);
    let verdict = |s: &str| -> Vec<String> {
        s.lines()
            .filter(|l| l.starts_with("verdict."))
            .map(String::from)
            .collect()
    };
    assert_eq!(verdict(&out_raw), verdict(&out_file));
}

#[test]
fn partitioning_does_not_change_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let values: Vec<f64> = (0..900).map(|i| (f64::from(i) * 1.618).fract()).collect();
    let whole = write(dir.path(), "whole.txt", &lines_of(values.iter().copied()));
    let p1 = write(
        dir.path(),
        "p1.txt",
        &lines_of(values[..300].iter().copied()),
    );
    let p2 = write(
        dir.path(),
        "p2.txt",
        &lines_of(values[300..350].iter().copied()),
    );
    let p3 = write(
        dir.path(),
        "p3.txt",
        &lines_of(values[350..].iter().copied()),
    );
    let comparison = write(
        dir.path(),
        "cmp.txt",
        &lines_of((0..60).map(|i| f64::from(i) / 60.0)),
    );

    let run_transform = |refs: &[&str]| {
        let mut args = vec!["test", "transform"];
        args.push("--reference");
        args.extend_from_slice(refs);
        args.extend_from_slice(&["--comparison", &comparison, "--dither", "--seed", "7"]);
        let (code, stdout, _) = run(&args);
        (code, strip_timing(&stdout))
    };

    let (code_whole, report_whole) = run_transform(&[&whole]);
    let (code_split, report_split) = run_transform(&[&p1, &p2, &p3]);
    assert_eq!(code_whole, code_split);
    // Reports differ only in the echoed input paths and timings.
    let drop_paths = |s: &str| {
        s.lines()
            .filter(|l| !l.starts_with("inputs.reference"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(drop_paths(&report_whole), drop_paths(&report_split));
}

#[test]
fn simulate_writes_csv_to_stdout() {
    let (code, stdout, _) = run(&[
        "simulate",
        "--n",
        "80",
        "--m",
        "40",
        "--reps",
        "200",
        "--seed",
        "5",
        "--mu-grid",
        "0,1",
        "--methods",
        "two_sample",
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("seed = 5"));
    assert!(stdout.contains("curve two_sample: 2 points"));
    assert!(stdout.contains("method,mu,rejection_rate,mc_stderr,n,m,replications,alpha,seed"));
    assert!(stdout.contains("two_sample,1,"));
}

#[test]
fn simulate_without_seed_prints_one() {
    let (code, stdout, _) = run(&[
        "simulate",
        "--n",
        "60",
        "--m",
        "30",
        "--reps",
        "100",
        "--mu-grid",
        "0",
        "--methods",
        "two_sample",
    ]);
    assert_eq!(code, 0);
    let seed_line = stdout.lines().find(|l| l.starts_with("seed = ")).unwrap();
    assert!(seed_line
        .trim_start_matches("seed = ")
        .parse::<u64>()
        .is_ok());
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("a.csv");
    let out2 = dir.path().join("b.csv");
    let base = [
        "simulate",
        "--n",
        "100",
        "--m",
        "50",
        "--reps",
        "300",
        "--seed",
        "11",
        "--mu-grid",
        "0,0.8",
    ];
    let mut args1: Vec<&str> = base.to_vec();
    args1.extend_from_slice(&["--out", out1.to_str().unwrap()]);
    let mut args2: Vec<&str> = base.to_vec();
    args2.extend_from_slice(&["--threads", "1", "--out", out2.to_str().unwrap()]);
    assert_eq!(run(&args1).0, 0);
    assert_eq!(run(&args2).0, 0);
    assert_eq!(fs::read(&out1).unwrap(), fs::read(&out2).unwrap());
}

#[test]
fn exponential_null_simulation_runs() {
    let (code, stdout, _) = run(&[
        "simulate",
        "--n",
        "200",
        "--m",
        "40",
        "--reps",
        "150",
        "--seed",
        "3",
        "--null",
        "exponential",
        "--rate",
        "1.0",
        "--mu-grid",
        "1,3",
        "--methods",
        "transform",
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("curve transform: 2 points"));
}
