use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use nested_mz_cli::report::execute;
use nested_mz_cli::{bundled, load_scenario, parse_scenario, run};
use nested_mz_core::Mirror;

fn bin(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nested-mz"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn present(name: &str) -> Vec<Mirror> {
    let parsed = parse_scenario(bundled::lookup(name).unwrap()).unwrap();
    let exp = execute(&parsed.scenario).unwrap();
    exp.peaks.iter().filter(|p| p.present).map(|p| p.mirror).collect()
}

#[test]
fn bundled_scenarios_round_trip() {
    for (name, text) in bundled::ALL {
        let first = parse_scenario(text).unwrap().scenario;
        let second = parse_scenario(&first.to_text()).unwrap().scenario;
        assert_eq!(first, second, "{name}");
    }
}

#[test]
fn destructive_pattern() {
    assert_eq!(present("fig1b"), vec![Mirror::A, Mirror::B, Mirror::C]);
}

#[test]
fn constructive_shows_everything() {
    assert_eq!(present("fig1a"), Mirror::ALL.to_vec());
}

#[test]
fn blocked_c_shows_nothing() {
    assert!(present("fig1c").is_empty());
}

#[test]
fn run_writes_requested_tables() {
    let dir = tempfile::tempdir().unwrap();
    let parsed = load_scenario("fig1b").unwrap();
    let report = run(&parsed, dir.path()).unwrap();
    let mut names: Vec<_> = report
        .files
        .iter()
        .map(|f| f.path.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(
        names,
        ["beamcurves.csv", "coeffs.csv", "peaks.csv", "spectrum.csv", "trace.csv"]
    );

    let peaks = fs::read_to_string(dir.path().join("peaks.csv")).unwrap();
    let mut lines = peaks.lines();
    assert_eq!(
        lines.next().unwrap(),
        "mirror,drive_frequency,frequency,power,floor_ratio,present"
    );
    assert_eq!(lines.count(), 5);

    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), parsed.scenario.sampling.sample_count() + 1);
}

#[test]
fn binary_run_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(&["run", "fig1b", "--out-dir", "o"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("peaks"));
    assert!(dir.path().join("o/peaks.csv").exists());
}

#[test]
fn quiet_suppresses_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(&["--quiet", "coeffs", "fig1a"], dir.path());
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert!(dir.path().join("out/coeffs.csv").exists());
}

#[test]
fn beamcurves_verb() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(&["beamcurves", "fig1b"], dir.path());
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("out/beamcurves.csv")).unwrap();
    assert!(csv.starts_with("k,psi_F,psi_A_term,psi_B_term,psi_D\n"));
    assert_eq!(csv.lines().count(), 402);
}

#[test]
fn malformed_scenario_exits_one_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.scn");
    fs::write(&path, "# header\nalignment = sideways\n").unwrap();
    let out = bin(&["run", path.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 2"), "{stderr}");
}

#[test]
fn missing_scenario_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(&["run", "no-such-scenario"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_override_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(&["run", "fig1a", "--rate", "100"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn duplicate_and_unknown_keys_rejected() {
    let dup = parse_scenario("alignment = destructive\nsigma = 1\nsigma = 2\n").unwrap_err();
    assert_eq!(dup.line, Some(3));
    let unknown = parse_scenario("alignment = destructive\ncolour = red\n").unwrap_err();
    assert_eq!(unknown.line, Some(2));
    let missing = parse_scenario("sigma = 1\n").unwrap_err();
    assert!(missing.to_string().contains("alignment"));
}
