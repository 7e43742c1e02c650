//! End-to-end tests of the aquamimo binary: exit codes, CSV schemas,
//! manifest reruns, and agreement with the library API.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use aquamimo_core::{
    ber_sweep, Allocator, AqamRule, ExperimentResult, LinkConfig, Precoder, ProfileSource,
};

const MINIMAL: &str = "n=8\npower=16\nsnr_db=10\nrate=16\nallocator=ewf\naqam=lemma4\n";

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_aquamimo"));
    cmd.env_remove("AQUAMIMO_THREADS");
    cmd
}

fn write_conf(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.conf");
    std::fs::write(&path, text).expect("config file must be writable");
    path
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("process must exit normally")
}

#[test]
fn help_exits_zero() {
    let out = bin().arg("--help").output().expect("binary must run");
    assert_eq!(exit_code(&out), 0, "--help must exit 0");
    assert!(
        stdout_of(&out).contains("alloc"),
        "help text should list the alloc subcommand"
    );
}

#[test]
fn bad_flags_and_missing_subcommands_exit_one() {
    let out = bin().output().expect("binary must run");
    assert_eq!(exit_code(&out), 1, "bare invocation is a usage error");
    let out = bin().arg("frobnicate").output().expect("binary must run");
    assert_eq!(exit_code(&out), 1, "unknown subcommand is a usage error");
    let out = bin()
        .args(["alloc", "--no-such-flag"])
        .output()
        .expect("binary must run");
    assert_eq!(exit_code(&out), 1, "unknown flag is a usage error");
}

#[test]
fn unknown_config_keys_are_listed_and_exit_one() {
    let dir = tempfile::tempdir().expect("tempdir");
    let conf = write_conf(dir.path(), &format!("{MINIMAL}zeta=1\nalpha=2\n"));
    let out = bin()
        .args(["alloc", "--config"])
        .arg(&conf)
        .output()
        .expect("binary must run");
    assert_eq!(exit_code(&out), 1, "unknown keys are a usage error");
    let err = stderr_of(&out);
    assert!(
        err.contains("alpha") && err.contains("zeta"),
        "stderr must list both unknown keys, got: {err}"
    );
}

#[test]
fn odd_rate_exits_one() {
    let dir = tempfile::tempdir().expect("tempdir");
    let conf = write_conf(dir.path(), &MINIMAL.replace("rate=16", "rate=65"));
    let out = bin()
        .args(["alloc", "--config"])
        .arg(&conf)
        .output()
        .expect("binary must run");
    assert_eq!(exit_code(&out), 1, "odd rate is a usage error");
    assert!(
        stderr_of(&out).contains("even"),
        "stderr should mention the even-rate requirement, got: {}",
        stderr_of(&out)
    );
}

#[test]
fn palomar_sizing_without_target_ser_exits_one() {
    let dir = tempfile::tempdir().expect("tempdir");
    let conf = write_conf(
        dir.path(),
        &MINIMAL
            .replace("allocator=ewf", "allocator=mwf")
            .replace("aqam=lemma4", "aqam=palomar"),
    );
    let out = bin()
        .args(["alloc", "--config"])
        .arg(&conf)
        .output()
        .expect("binary must run");
    assert_eq!(exit_code(&out), 1, "missing target_ser is a usage error");
}

#[test]
fn missing_config_file_exits_one() {
    let out = bin()
        .args(["alloc", "--config", "/nonexistent/path.conf"])
        .output()
        .expect("binary must run");
    assert_eq!(exit_code(&out), 1, "unreadable config is a usage error");
}

#[test]
fn unreachable_rate_exits_two() {
    let dir = tempfile::tempdir().expect("tempdir");
    let conf = write_conf(
        dir.path(),
        "n=2\npower=4\nsnr_db=10\nrate=62\nallocator=ewf\naqam=lemma4\n",
    );
    let out = bin()
        .args(["alloc", "--config"])
        .arg(&conf)
        .output()
        .expect("binary must run");
    assert_eq!(
        exit_code(&out),
        2,
        "a rate no size assignment can reach is a runtime error, stderr: {}",
        stderr_of(&out)
    );
}

#[test]
fn invalid_threads_env_exits_one() {
    let dir = tempfile::tempdir().expect("tempdir");
    let conf = write_conf(dir.path(), MINIMAL);
    let out = bin()
        .env("AQUAMIMO_THREADS", "many")
        .args(["alloc", "--config"])
        .arg(&conf)
        .output()
        .expect("binary must run");
    assert_eq!(exit_code(&out), 1, "unparsable thread count is a usage error");
}

#[test]
fn alloc_with_rate_zero_keeps_every_subchannel_silent() {
    let dir = tempfile::tempdir().expect("tempdir");
    let conf = write_conf(dir.path(), &MINIMAL.replace("rate=16", "rate=0"));
    let outdir = dir.path().join("out");
    let out = bin()
        .args(["alloc", "--config"])
        .arg(&conf)
        .arg("--out")
        .arg(&outdir)
        .output()
        .expect("binary must run");
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    let csv = std::fs::read_to_string(outdir.join("alloc.csv")).expect("alloc.csv must exist");
    for line in csv.lines().skip(1) {
        let m = line.split(',').nth(3).expect("m column");
        assert_eq!(m, "1", "rate 0 must leave every size at 1, got row: {line}");
    }
    assert!(
        stdout_of(&out).contains("k_opt=8"),
        "all subchannels should count as deactivated, stdout: {}",
        stdout_of(&out)
    );
}

#[test]
fn alloc_reports_fourteen_deactivated_at_the_reference_point() {
    let dir = tempfile::tempdir().expect("tempdir");
    let conf = write_conf(
        dir.path(),
        "n=96\npower=192\nsnr_db=22\nrate=384\nallocator=ewf\naqam=lemma4\n",
    );
    let out = bin()
        .args(["alloc", "--config"])
        .arg(&conf)
        .output()
        .expect("binary must run");
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    let last = stdout_of(&out);
    let footer = last.lines().last().expect("footer line expected");
    assert_eq!(footer, "k_opt=14", "unexpected footer: {footer}");
}

#[test]
fn alloc_csv_bytes_are_deterministic() {
    let dir = tempfile::tempdir().expect("tempdir");
    let conf = write_conf(
        dir.path(),
        &format!("{MINIMAL}profile=empirical\nseed=77\n"),
    );
    let run = |name: &str| {
        let outdir = dir.path().join(name);
        let out = bin()
            .args(["alloc", "--config"])
            .arg(&conf)
            .arg("--out")
            .arg(&outdir)
            .output()
            .expect("binary must run");
        assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
        std::fs::read(outdir.join("alloc.csv")).expect("alloc.csv must exist")
    };
    assert_eq!(
        run("a"),
        run("b"),
        "identical config and seed must give identical CSV bytes"
    );
}

#[test]
fn capacity_csv_schema_and_manifest_rerun_match() {
    let dir = tempfile::tempdir().expect("tempdir");
    let conf = write_conf(
        dir.path(),
        &format!("{MINIMAL}target_ser=0.001\ntrials=20\nk_grid=0..4\nseed=3\n"),
    );
    let out_a = dir.path().join("a");
    let out = bin()
        .args(["capacity-vs-k", "--config"])
        .arg(&conf)
        .arg("--out")
        .arg(&out_a)
        .output()
        .expect("binary must run");
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    let csv = std::fs::read_to_string(out_a.join("capacity.csv")).expect("csv must exist");
    assert!(
        csv.starts_with("k,scheme,mean_capacity,ci95,trials\n"),
        "unexpected header: {}",
        csv.lines().next().unwrap_or("")
    );
    assert!(csv.ends_with('\n'), "CSV must end with a newline");
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(
        rows.len(),
        4 * 5,
        "4 k values times 5 schemes expected, got {}",
        rows.len()
    );
    assert!(
        out_a.join("plot_capacity.py").exists(),
        "plot script must be written"
    );
    let manifest = out_a.join("manifest.txt");
    assert!(manifest.exists(), "manifest must be written");

    let out_b = dir.path().join("b");
    let out = bin()
        .args(["capacity-vs-k", "--config"])
        .arg(&manifest)
        .arg("--out")
        .arg(&out_b)
        .output()
        .expect("binary must run");
    assert_eq!(exit_code(&out), 0, "rerun stderr: {}", stderr_of(&out));
    assert_eq!(
        std::fs::read(out_a.join("capacity.csv")).expect("csv a"),
        std::fs::read(out_b.join("capacity.csv")).expect("csv b"),
        "rerun from the manifest must reproduce the CSV byte for byte"
    );
    assert_eq!(
        std::fs::read(out_a.join("manifest.txt")).expect("manifest a"),
        std::fs::read(out_b.join("manifest.txt")).expect("manifest b"),
        "rerun must write the same manifest"
    );
}

#[test]
fn capacity_with_empty_k_grid_writes_header_only() {
    let dir = tempfile::tempdir().expect("tempdir");
    let conf = write_conf(dir.path(), &format!("{MINIMAL}trials=2\nk_grid=\n"));
    let outdir = dir.path().join("out");
    let out = bin()
        .args(["capacity-vs-k", "--config"])
        .arg(&conf)
        .arg("--out")
        .arg(&outdir)
        .output()
        .expect("binary must run");
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    let csv = std::fs::read_to_string(outdir.join("capacity.csv")).expect("csv must exist");
    assert_eq!(
        csv, "k,scheme,mean_capacity,ci95,trials\n",
        "empty grid must produce a header-only CSV"
    );
}

#[test]
fn ber_sweep_with_empty_grid_writes_header_only() {
    let dir = tempfile::tempdir().expect("tempdir");
    let conf = write_conf(dir.path(), &format!("{MINIMAL}trials=2\nsnr_grid_db=\n"));
    let outdir = dir.path().join("out");
    let out = bin()
        .args(["ber-sweep", "--config"])
        .arg(&conf)
        .arg("--out")
        .arg(&outdir)
        .output()
        .expect("binary must run");
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    let csv = std::fs::read_to_string(outdir.join("ber.csv")).expect("csv must exist");
    assert_eq!(
        csv, "snr_db,scheme,ber,ci95,bits,k_opt\n",
        "empty grid must produce a header-only CSV"
    );
}

#[test]
fn ber_sweep_rejects_unsorted_grids() {
    let dir = tempfile::tempdir().expect("tempdir");
    let conf = write_conf(
        dir.path(),
        &format!("{MINIMAL}trials=2\nsnr_grid_db=9,6\n"),
    );
    let out = bin()
        .args(["ber-sweep", "--config"])
        .arg(&conf)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .expect("binary must run");
    assert_eq!(exit_code(&out), 1, "descending grid is a usage error");
}

#[test]
fn ber_sweep_csv_equals_library_results_exactly() {
    let dir = tempfile::tempdir().expect("tempdir");
    let conf = write_conf(
        dir.path(),
        "n=8\npower=16\nsnr_grid_db=6,9\nrate=16\nallocator=ewf\naqam=lemma4\ntrials=64\nseed=9\n",
    );
    let outdir = dir.path().join("out");
    let out = bin()
        .args(["ber-sweep", "--config"])
        .arg(&conf)
        .arg("--out")
        .arg(&outdir)
        .output()
        .expect("binary must run");
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));

    let template = LinkConfig {
        n: 8,
        power: 16.0,
        snr_db: 6.0,
        target_rate: 16,
        allocator: Allocator::Ewf,
        aqam: AqamRule::FromWf,
        target_ser: None,
        precoder: Precoder::FullSvd,
        profile_source: ProfileSource::Asymptotic,
    };
    let result = ber_sweep(&template, &[6.0, 9.0], 64, 9).expect("library sweep must run");
    let ExperimentResult::Ber(rows) = result else {
        panic!("expected BER rows");
    };

    let csv = std::fs::read_to_string(outdir.join("ber.csv")).expect("csv must exist");
    let lines: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(lines.len(), rows.len(), "row count mismatch");
    for (line, row) in lines.iter().zip(&rows) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[1], row.scheme, "scheme mismatch in row: {line}");
        let snr: f64 = f[0].parse().expect("snr field");
        let ber: f64 = f[2].parse().expect("ber field");
        let ci: f64 = f[3].parse().expect("ci field");
        let bits: u64 = f[4].parse().expect("bits field");
        let k_opt: usize = f[5].parse().expect("k_opt field");
        assert_eq!(snr, row.snr_db, "snr must round trip exactly: {line}");
        assert_eq!(ber, row.ber, "ber must round trip exactly: {line}");
        assert_eq!(ci, row.ci95, "ci95 must round trip exactly: {line}");
        assert_eq!(bits, row.bits, "bits mismatch: {line}");
        assert_eq!(k_opt, row.k_opt, "k_opt mismatch: {line}");
    }
}

#[test]
fn profile_dump_is_ascending_and_matches_dimension() {
    let dir = tempfile::tempdir().expect("tempdir");
    let conf = write_conf(dir.path(), MINIMAL);
    let out = bin()
        .args(["profile", "--config"])
        .arg(&conf)
        .output()
        .expect("binary must run");
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    let etas: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).expect("eta column").parse().expect("eta"))
        .collect();
    assert_eq!(etas.len(), 8, "one eta per subchannel expected");
    assert!(
        etas.windows(2).all(|w| w[0] < w[1]),
        "asymptotic profile must be strictly ascending, got {etas:?}"
    );
}
