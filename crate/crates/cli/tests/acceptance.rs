//! Exit criteria. Each test prints one PASS/FAIL line before asserting.

use std::fs;
use std::time::{Duration, Instant};

use nested_mz_cli::report::{execute, Experiment};
use nested_mz_cli::{bundled, parse_scenario, run, Scenario};
use nested_mz_core::dynamics::PowerSpectrum;
use nested_mz_core::interferometer::{AlignmentMode, InterferometerConfig, Mirror, TiltVector};
use nested_mz_core::smallsignal::{analytic_coefficients, numeric_coefficients};
use nested_mz_core::spectrum::{normalize_l2, BeamState, KGrid, Term};
use nested_mz_core::{quad_signal, quad_signal_quadrature};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EQUAL_PEAKS_TOL: f64 = 0.01;
const DARK_PEAK_RATIO: f64 = 1e-4;
const FOUR_TIMES_TOL: f64 = 0.02;
const BLOCKED_RATIO: f64 = 1e-6;
const COEFF_TOL: f64 = 1e-3;
const COEFF_EPSILON: f64 = 1e-4;
const RESIDUE_SLOPE: f64 = 2.0;
const RESIDUE_SLOPE_TOL: f64 = 0.2;
const ORACLE_REL_TOL: f64 = 1e-10;
const ORACLE_STATES: usize = 1000;
const RUNTIME_LIMIT: Duration = Duration::from_secs(10);

fn verdict(id: u32, name: &str, pass: bool, detail: String) {
    println!("[{}] criterion {id}: {name} ({detail})", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id} failed: {name} ({detail})");
}

fn bundled_scenario(name: &str) -> Scenario {
    parse_scenario(bundled::lookup(name).unwrap()).unwrap().scenario
}

fn peak(spec: &PowerSpectrum, m: Mirror) -> f64 {
    spec.peak(m).unwrap().power
}

fn fig(name: &str) -> Experiment {
    execute(&bundled_scenario(name)).unwrap()
}

#[test]
fn criterion_1_fig1b_pattern() {
    let start = Instant::now();
    let exp = fig("fig1b");
    let elapsed = start.elapsed();
    let s = &exp.spectrum;
    let live = [peak(s, Mirror::A), peak(s, Mirror::B), peak(s, Mirror::C)];
    let hi = live.iter().cloned().fold(f64::MIN, f64::max);
    let lo = live.iter().cloned().fold(f64::MAX, f64::min);
    let spread = hi / lo - 1.0;
    let e = peak(s, Mirror::E) / peak(s, Mirror::A);
    let f = peak(s, Mirror::F) / peak(s, Mirror::A);
    let pass = spread <= EQUAL_PEAKS_TOL && e <= DARK_PEAK_RATIO && f <= DARK_PEAK_RATIO && elapsed < RUNTIME_LIMIT;
    verdict(
        1,
        "fig1b peaks at A, B, C equal; E, F dark",
        pass,
        format!("A/B/C spread {spread:.2e}, E/A {e:.2e}, F/A {f:.2e}, {:.2?}", elapsed),
    );
}

#[test]
fn criterion_2_fig1a_four_times() {
    let exp = fig("fig1a");
    let e_a = exp.spectrum.peak_ratio(Mirror::E, Mirror::A).unwrap();
    let f_b = exp.spectrum.peak_ratio(Mirror::F, Mirror::B).unwrap();
    let pass = (e_a / 4.0 - 1.0).abs() <= FOUR_TIMES_TOL && (f_b / 4.0 - 1.0).abs() <= FOUR_TIMES_TOL;
    verdict(2, "fig1a E and F peaks four times A and B", pass, format!("E/A {e_a:.6}, F/B {f_b:.6}"));
}

#[test]
fn criterion_3_fig1c_null() {
    let reference = peak(&fig("fig1a").spectrum, Mirror::A);
    let scenario = bundled_scenario("fig1c");
    let exp = execute(&scenario).unwrap();
    let worst = scenario
        .drives
        .iter()
        .map(|d| exp.spectrum.power_near(d.frequency))
        .fold(0.0, f64::max)
        / reference;
    verdict(
        3,
        "fig1c drive bins below 1e-6 of fig1a A peak",
        worst <= BLOCKED_RATIO,
        format!("worst ratio {worst:.2e}"),
    );
}

#[test]
fn criterion_4_coefficient_gate() {
    let base = normalize_l2(1.0).unwrap();
    let mut worst: f64 = 0.0;
    for mode in [AlignmentMode::DestructiveInner, AlignmentMode::ConstructiveInner] {
        let cfg = InterferometerConfig::new(mode, base);
        let num = numeric_coefficients(&cfg, COEFF_EPSILON * base.sigma()).unwrap();
        worst = worst.max(num.coefficients.max_abs_diff(&analytic_coefficients(mode)));
    }
    verdict(
        4,
        "finite-difference vs analytic coefficients",
        worst <= COEFF_TOL,
        format!("max entry error {worst:.2e}"),
    );
}

fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

#[test]
fn criterion_5_second_order_residue_law() {
    let amplitudes = [1e-4, 3e-4, 1e-3];
    let mut powers = Vec::new();
    for k0 in amplitudes {
        let mut s = bundled_scenario("fig1b");
        for d in s.drives.iter_mut() {
            d.amplitude = k0 * s.sigma;
        }
        powers.push(peak(&execute(&s).unwrap().spectrum, Mirror::E));
    }
    let slope = log_log_slope(&amplitudes, &powers);
    verdict(
        5,
        "destructive f_E peak power slope vs kappa0 is 2",
        (slope - RESIDUE_SLOPE).abs() <= RESIDUE_SLOPE_TOL,
        format!("slope {slope:.3}, powers {:?}", powers.iter().map(|p| format!("{p:.3e}")).collect::<Vec<_>>()),
    );
}

#[test]
fn criterion_6_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst: f64 = 0.0;
    for _ in 0..ORACLE_STATES {
        let sigma = rng.gen_range(0.5..2.0);
        let base = normalize_l2(sigma).unwrap();
        let n = rng.gen_range(1..=8);
        let terms = (0..n)
            .map(|_| Term::new(rng.gen_range(-1.0..1.0), rng.gen_range(-0.1..0.1) * sigma))
            .collect();
        let state = BeamState::from_terms(base, terms);
        let closed = quad_signal(&state).value();
        let quad = quad_signal_quadrature(&state).unwrap().value();
        let scale = closed.abs().max(quad.abs());
        if scale > 0.0 {
            worst = worst.max((closed - quad).abs() / scale);
        }
    }
    verdict(
        6,
        "erf closed form vs adaptive quadrature on 1000 random states",
        worst <= ORACLE_REL_TOL,
        format!("max relative difference {worst:.2e}"),
    );
}

#[test]
fn criterion_7_cancellation_exactness() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cfg = InterferometerConfig::new(AlignmentMode::DestructiveInner, normalize_l2(1.0).unwrap());
    let grid = KGrid::symmetric(6.0, 1201).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let inner = rng.gen_range(-1e-3..1e-3);
        let t = TiltVector::new(
            inner,
            inner,
            rng.gen_range(-1e-3..1e-3),
            rng.gen_range(-1e-3..1e-3),
            rng.gen_range(-1e-3..1e-3),
        );
        let v = cfg.psi_f(&t).evaluate(&grid);
        worst = worst.max(v.iter().fold(0.0, |m, x| m.max(x.abs())));
    }
    let bound = f64::EPSILON * cfg.base.norm();
    verdict(
        7,
        "equal inner tilts cancel psi_F at every grid point",
        worst <= bound,
        format!("max |psi_F| {worst:.2e}"),
    );
}

#[test]
fn criterion_8_determinism() {
    let parsed = parse_scenario(bundled::FIG1B).unwrap();
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let a = run(&parsed, first.path()).unwrap();
    let b = run(&parsed, second.path()).unwrap();
    let mut identical = a.files.len() == b.files.len() && !a.files.is_empty();
    for (fa, fb) in a.files.iter().zip(&b.files) {
        identical &= fa.path.file_name() == fb.path.file_name();
        identical &= fs::read(&fa.path).unwrap() == fs::read(&fb.path).unwrap();
    }
    verdict(
        8,
        "repeated fig1b runs emit byte-identical CSVs",
        identical,
        format!("{} files compared", a.files.len()),
    );
}
