//! Running a scenario end to end and reporting on it.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use nested_mz_core::dynamics::{self, PowerSpectrum, Sampling, SignalTrace};
use nested_mz_core::interferometer::{InterferometerConfig, Mirror};
use nested_mz_core::smallsignal::{self, NumericSensitivity, SensitivityVector, DEFAULT_EPSILON_RATIO};
use nested_mz_core::spectrum::normalize_l2;

use crate::emit::{self, Table};
use crate::error::CliError;
use crate::scenario::{Output, ParsedScenario, Scenario, ScenarioError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakRow {
    pub mirror: Mirror,
    pub drive_frequency: f64,
    pub frequency: f64,
    pub power: f64,
    pub floor_ratio: f64,
    pub present: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub analytic: SensitivityVector,
    pub numeric: NumericSensitivity,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileEntry {
    pub path: PathBuf,
    pub rows: usize,
}

/// Everything computed for one scenario, before anything touches disk.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: InterferometerConfig,
    pub trace: SignalTrace,
    pub spectrum: PowerSpectrum,
    pub threshold: f64,
    pub peaks: Vec<PeakRow>,
    pub coefficients: Coefficients,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub scenario: Scenario,
    pub defaulted: Vec<String>,
    pub floor: f64,
    pub threshold: f64,
    pub peaks: Vec<PeakRow>,
    pub coefficients: Coefficients,
    pub files: Vec<FileEntry>,
}

pub fn config_for(scenario: &Scenario) -> InterferometerConfig {
    let base = normalize_l2(scenario.sigma).expect("sigma validated at parse time");
    InterferometerConfig::new(scenario.alignment, base)
}

/// Replaces the sampling with `--duration` / `--rate` values and re-checks it.
pub fn apply_overrides(
    scenario: &mut Scenario,
    duration: Option<f64>,
    rate: Option<f64>,
) -> Result<(), ScenarioError> {
    let mut sampling = scenario.sampling;
    if let Some(d) = duration {
        sampling.duration = d;
    }
    if let Some(r) = rate {
        if !(r > 0.0 && r.is_finite()) {
            return Err(ScenarioError {
                line: None,
                message: format!("--rate must be positive, got {r}"),
            });
        }
        sampling.dt = 1.0 / r;
    }
    sampling.validate(&scenario.drives).map_err(|e| ScenarioError {
        line: None,
        message: e.to_string(),
    })?;
    scenario.sampling = sampling;
    Ok(())
}

pub fn coefficients(scenario: &Scenario) -> Result<Coefficients, CliError> {
    let config = config_for(scenario);
    Ok(Coefficients {
        analytic: smallsignal::analytic_coefficients(scenario.alignment),
        numeric: smallsignal::numeric_coefficients(&config, DEFAULT_EPSILON_RATIO * scenario.sigma)?,
    })
}

pub fn execute(scenario: &Scenario) -> Result<Experiment, CliError> {
    execute_with(scenario, scenario.sampling)
}

pub fn execute_with(scenario: &Scenario, sampling: Sampling) -> Result<Experiment, CliError> {
    let config = config_for(scenario);
    let trace = dynamics::simulate(&config, &scenario.drives, sampling)?;
    let spectrum = dynamics::power_spectrum(&trace, &scenario.drives)?;
    let threshold = dynamics::detection_threshold(&config.base, &scenario.drives);
    let detected = spectrum.detected(threshold);
    let peaks = spectrum
        .peaks
        .values()
        .map(|p| PeakRow {
            mirror: p.mirror,
            drive_frequency: p.drive_frequency,
            frequency: p.frequency,
            power: p.power,
            floor_ratio: p.floor_ratio,
            present: detected.contains(&p.mirror),
        })
        .collect();
    Ok(Experiment {
        config,
        trace,
        spectrum,
        threshold,
        peaks,
        coefficients: coefficients(scenario)?,
    })
}

fn write_table(dir: &Path, name: &str, table: Table) -> Result<FileEntry, CliError> {
    let path = dir.join(name);
    fs::write(&path, &table.bytes).map_err(|source| CliError::Write {
        path: path.clone(),
        source,
    })?;
    Ok(FileEntry { path, rows: table.rows })
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.to_path_buf(),
        source,
    })
}

pub fn write_beamcurves(scenario: &Scenario, out_dir: &Path) -> Result<FileEntry, CliError> {
    ensure_dir(out_dir)?;
    let config = config_for(scenario);
    let table = emit::beamcurves(&config, &scenario.snapshot, &scenario.grid.to_grid(scenario.sigma));
    write_table(out_dir, &Output::Beamcurves.file_name(), table)
}

pub fn write_coeffs(coeffs: &Coefficients, out_dir: &Path) -> Result<FileEntry, CliError> {
    ensure_dir(out_dir)?;
    write_table(
        out_dir,
        &Output::Coeffs.file_name(),
        emit::coeffs(&coeffs.analytic, &coeffs.numeric),
    )
}

/// Simulates, analyses and writes every requested output, in a fixed order.
pub fn run(parsed: &ParsedScenario, out_dir: &Path) -> Result<RunReport, CliError> {
    let scenario = &parsed.scenario;
    let exp = execute(scenario)?;
    ensure_dir(out_dir)?;

    let mut files = Vec::new();
    for output in &scenario.outputs {
        let entry = match output {
            Output::Trace => write_table(out_dir, &output.file_name(), emit::trace(&exp.trace))?,
            Output::Spectrum => write_table(out_dir, &output.file_name(), emit::spectrum(&exp.spectrum))?,
            Output::Peaks => write_table(out_dir, &output.file_name(), emit::peaks(&exp.peaks))?,
            Output::Coeffs => write_coeffs(&exp.coefficients, out_dir)?,
            Output::Beamcurves => write_beamcurves(scenario, out_dir)?,
        };
        files.push(entry);
    }

    Ok(RunReport {
        scenario: scenario.clone(),
        defaulted: parsed.defaulted.clone(),
        floor: exp.spectrum.floor,
        threshold: exp.threshold,
        peaks: exp.peaks,
        coefficients: exp.coefficients,
        files,
    })
}

pub struct CoefficientTable<'a>(pub &'a Coefficients);

impl fmt::Display for CoefficientTable<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.0;
        writeln!(f, "{:<7}{:>10}{:>16}{:>16}", "mirror", "analytic", "numeric", "dS/dkappa")?;
        for m in Mirror::ALL {
            writeln!(
                f,
                "{:<7}{:>10}{:>16.9}{:>16.6e}",
                m.name(),
                c.analytic.get(m),
                c.numeric.coefficients.get(m),
                c.numeric.raw.get(m)
            )?;
        }
        match c.numeric.gain {
            Some(k) => writeln!(f, "gain K (dS/dkappa_C) = {k:.9e}, epsilon = {:.1e}", c.numeric.epsilon),
            None => writeln!(f, "no live C arm: coefficients are raw derivatives, epsilon = {:.1e}", c.numeric.epsilon),
        }
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = &self.scenario;
        writeln!(f, "scenario")?;
        writeln!(f, "  alignment  {}", s.alignment)?;
        writeln!(f, "  sigma      {}", s.sigma)?;
        writeln!(
            f,
            "  sampling   dt = {:.6e}, duration = {}, samples = {}",
            s.sampling.dt,
            s.sampling.duration,
            s.sampling.sample_count()
        )?;
        for d in &s.drives {
            writeln!(
                f,
                "  mirror {}   f = {:<8} amplitude = {:.3e}  phase = {}",
                d.mirror, d.frequency, d.amplitude, d.phase
            )?;
        }
        if !self.defaulted.is_empty() {
            writeln!(f, "  defaults   {}", self.defaulted.join(", "))?;
        }

        writeln!(f)?;
        writeln!(f, "peaks (floor {:.3e}, detection threshold {:.3e})", self.floor, self.threshold)?;
        writeln!(f, "{:<7}{:>10}{:>12}{:>16}{:>14}  present", "mirror", "drive", "bin", "power", "floor ratio")?;
        for p in &self.peaks {
            writeln!(
                f,
                "{:<7}{:>10}{:>12.3}{:>16.6e}{:>14.3e}  {}",
                p.mirror.name(),
                p.drive_frequency,
                p.frequency,
                p.power,
                p.floor_ratio,
                if p.present { "yes" } else { "no" }
            )?;
        }

        writeln!(f)?;
        writeln!(f, "coefficients")?;
        write!(f, "{}", CoefficientTable(&self.coefficients))?;

        writeln!(f)?;
        writeln!(f, "files")?;
        for e in &self.files {
            writeln!(f, "  {} ({} rows)", e.path.display(), e.rows)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::parse_scenario;

    #[test]
    fn overrides_are_validated() {
        let mut s = parse_scenario("alignment = destructive\n").unwrap().scenario;
        apply_overrides(&mut s, Some(2.0), Some(8000.0)).unwrap();
        assert_eq!(s.sampling.duration, 2.0);
        assert_eq!(s.sampling.dt, 1.0 / 8000.0);
        assert!(apply_overrides(&mut s, Some(0.01), None).is_err());
        assert!(apply_overrides(&mut s, None, Some(1000.0)).is_err());
        assert!(apply_overrides(&mut s, None, Some(-1.0)).is_err());
        assert_eq!(s.sampling.duration, 2.0);
    }

    #[test]
    fn undriven_mirror_has_no_peak() {
        let s = parse_scenario("alignment = destructive\nmirror E amplitude = 0\n")
            .unwrap()
            .scenario;
        let exp = execute(&s).unwrap();
        assert!(exp.peaks.iter().all(|p| p.mirror != Mirror::E));
        assert!(exp.spectrum.peak_ratio(Mirror::E, Mirror::A).is_err());
    }
}
