//! Scenario files.
//!
//! One `key = value` per line, `#` starts a comment. Per-mirror settings use
//! compound keys:
//!
//! ```text
//! alignment = destructive
//! sigma = 1
//! mirror E amplitude = 0
//! mirror A frequency = 283
//! tilt A = 1e-3
//! outputs = trace, spectrum, peaks
//! ```
//!
//! Anything not given falls back to the defaults in
//! [`nested_mz_core::dynamics`]; the names of defaulted keys are kept so the
//! run report can list them.

use std::collections::{BTreeSet, HashSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use nested_mz_core::dynamics::{self, MirrorDrive, Sampling, DEFAULT_AMPLITUDE_RATIO, DEFAULT_FREQUENCIES};
use nested_mz_core::interferometer::{AlignmentMode, Mirror, TiltVector};
use nested_mz_core::spectrum::KGrid;
use thiserror::Error;

pub const DEFAULT_GRID_SPAN: f64 = 4.0;
pub const DEFAULT_GRID_POINTS: usize = 401;

#[derive(Debug, Clone, Error, PartialEq)]
pub struct ScenarioError {
    pub line: Option<usize>,
    pub message: String,
}

impl ScenarioError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            message: message.into(),
        }
    }

    fn global(message: impl Into<String>) -> Self {
        Self {
            line: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(n) => write!(f, "line {n}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Output {
    Trace,
    Spectrum,
    Peaks,
    Beamcurves,
    Coeffs,
}

impl Output {
    pub const ALL: [Output; 5] = [
        Output::Trace,
        Output::Spectrum,
        Output::Peaks,
        Output::Beamcurves,
        Output::Coeffs,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            Output::Trace => "trace",
            Output::Spectrum => "spectrum",
            Output::Peaks => "peaks",
            Output::Beamcurves => "beamcurves",
            Output::Coeffs => "coeffs",
        }
    }

    pub fn file_name(self) -> String {
        format!("{}.csv", self.keyword())
    }
}

impl FromStr for Output {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Output::ALL
            .into_iter()
            .find(|o| o.keyword() == s)
            .ok_or_else(|| format!("unknown output `{s}` (expected trace, spectrum, peaks, beamcurves, coeffs)"))
    }
}

/// k-axis sampling for beam curves, in units of sigma.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub span: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn to_grid(self, sigma: f64) -> KGrid {
        KGrid::symmetric(self.span * sigma, self.points).expect("validated at parse time")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub alignment: AlignmentMode,
    pub sigma: f64,
    /// One entry per mirror in A, B, C, E, F order; zero amplitude means undriven.
    pub drives: Vec<MirrorDrive>,
    pub sampling: Sampling,
    pub outputs: BTreeSet<Output>,
    /// Static tilts for the beam-curve snapshot.
    pub snapshot: TiltVector,
    pub grid: GridSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedScenario {
    pub scenario: Scenario,
    pub defaulted: Vec<String>,
}

fn default_outputs() -> BTreeSet<Output> {
    [Output::Trace, Output::Spectrum, Output::Peaks, Output::Coeffs]
        .into_iter()
        .collect()
}

#[derive(Default)]
struct MirrorFields {
    frequency: Option<f64>,
    amplitude: Option<f64>,
    phase: Option<f64>,
}

fn number(line: usize, key: &str, value: &str) -> Result<f64, ScenarioError> {
    let v: f64 = value
        .parse()
        .map_err(|_| ScenarioError::at(line, format!("`{key}` expects a number, got `{value}`")))?;
    if !v.is_finite() {
        return Err(ScenarioError::at(line, format!("`{key}` must be finite")));
    }
    Ok(v)
}

pub fn parse_scenario(text: &str) -> Result<ParsedScenario, ScenarioError> {
    let mut seen: HashSet<String> = HashSet::new();
    let mut alignment = None;
    let mut sigma = None;
    let mut dt = None;
    let mut duration = None;
    let mut outputs = None;
    let mut grid_span = None;
    let mut grid_points = None;
    let mut mirrors: [MirrorFields; 5] = Default::default();
    let mut snapshot = TiltVector::zero();
    let mut sampling_line = 0;
    let mut mirror_lines = [0usize; 5];

    for (idx, raw) in text.lines().enumerate() {
        let n = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| ScenarioError::at(n, format!("expected `key = value`, got `{content}`")))?;
        let key_parts: Vec<&str> = key.split_whitespace().collect();
        let value = value.trim();
        if key_parts.is_empty() {
            return Err(ScenarioError::at(n, "missing key before `=`"));
        }
        if value.is_empty() {
            return Err(ScenarioError::at(n, format!("missing value for `{}`", key_parts.join(" "))));
        }
        let canonical = key_parts.join(" ");
        if !seen.insert(canonical.clone()) {
            return Err(ScenarioError::at(n, format!("duplicate key `{canonical}`")));
        }

        match key_parts.as_slice() {
            ["alignment"] => {
                alignment = Some(
                    value
                        .parse::<AlignmentMode>()
                        .map_err(|e| ScenarioError::at(n, e.to_string()))?,
                )
            }
            ["sigma"] => {
                let v = number(n, "sigma", value)?;
                if v <= 0.0 {
                    return Err(ScenarioError::at(n, "sigma must be positive"));
                }
                sigma = Some(v);
            }
            ["dt"] => {
                dt = Some(number(n, "dt", value)?);
                sampling_line = n;
            }
            ["duration"] => {
                duration = Some(number(n, "duration", value)?);
                sampling_line = sampling_line.max(n);
            }
            ["outputs"] => {
                let mut set = BTreeSet::new();
                for item in value.split(',').map(str::trim) {
                    if item.is_empty() {
                        continue;
                    }
                    set.insert(item.parse::<Output>().map_err(|e| ScenarioError::at(n, e))?);
                }
                outputs = Some(set);
            }
            ["grid", "span"] => {
                let v = number(n, "grid span", value)?;
                if v <= 0.0 {
                    return Err(ScenarioError::at(n, "grid span must be positive"));
                }
                grid_span = Some(v);
            }
            ["grid", "points"] => {
                let v: usize = value
                    .parse()
                    .map_err(|_| ScenarioError::at(n, format!("`grid points` expects an integer, got `{value}`")))?;
                if v < 2 {
                    return Err(ScenarioError::at(n, "grid points must be at least 2"));
                }
                grid_points = Some(v);
            }
            ["tilt", m] => {
                let mirror = m.parse::<Mirror>().map_err(|e| ScenarioError::at(n, e.to_string()))?;
                snapshot.set(mirror, number(n, &canonical, value)?);
            }
            ["mirror", m, field] => {
                let mirror = m.parse::<Mirror>().map_err(|e| ScenarioError::at(n, e.to_string()))?;
                let v = number(n, &canonical, value)?;
                let slot = &mut mirrors[mirror.index()];
                match *field {
                    "frequency" => slot.frequency = Some(v),
                    "amplitude" => slot.amplitude = Some(v),
                    "phase" => slot.phase = Some(v),
                    other => {
                        return Err(ScenarioError::at(
                            n,
                            format!("unknown mirror field `{other}` (expected frequency, amplitude, phase)"),
                        ))
                    }
                }
                mirror_lines[mirror.index()] = n;
            }
            _ => return Err(ScenarioError::at(n, format!("unknown key `{canonical}`"))),
        }
    }

    let mut defaulted = Vec::new();
    let mut take = |name: &str, given: bool| {
        if !given {
            defaulted.push(name.to_string());
        }
    };

    let alignment = alignment.ok_or_else(|| ScenarioError::global("missing required key `alignment`"))?;
    take("sigma", sigma.is_some());
    let sigma = sigma.unwrap_or(1.0);

    let mut drives = Vec::with_capacity(5);
    for (mirror, default_frequency) in DEFAULT_FREQUENCIES {
        let fields = &mirrors[mirror.index()];
        take(&format!("mirror {mirror} frequency"), fields.frequency.is_some());
        take(&format!("mirror {mirror} amplitude"), fields.amplitude.is_some());
        take(&format!("mirror {mirror} phase"), fields.phase.is_some());
        let drive = MirrorDrive::new(
            mirror,
            fields.frequency.unwrap_or(default_frequency),
            fields.amplitude.unwrap_or(DEFAULT_AMPLITUDE_RATIO * sigma),
            fields.phase.unwrap_or(0.0),
        )
        .map_err(|e| ScenarioError {
            line: Some(mirror_lines[mirror.index()]).filter(|&l| l > 0),
            message: e.to_string(),
        })?;
        drives.push(drive);
    }
    dynamics::validate_drives(&drives).map_err(|e| ScenarioError::global(e.to_string()))?;

    let fallback = Sampling::default_for(&drives);
    take("dt", dt.is_some());
    take("duration", duration.is_some());
    let sampling = Sampling {
        dt: dt.unwrap_or(fallback.dt),
        duration: duration.unwrap_or(fallback.duration),
    };
    sampling.validate(&drives).map_err(|e| ScenarioError {
        line: Some(sampling_line).filter(|&l| l > 0),
        message: e.to_string(),
    })?;

    take("outputs", outputs.is_some());
    take("grid span", grid_span.is_some());
    take("grid points", grid_points.is_some());

    Ok(ParsedScenario {
        scenario: Scenario {
            alignment,
            sigma,
            drives,
            sampling,
            outputs: outputs.unwrap_or_else(default_outputs),
            snapshot,
            grid: GridSpec {
                span: grid_span.unwrap_or(DEFAULT_GRID_SPAN),
                points: grid_points.unwrap_or(DEFAULT_GRID_POINTS),
            },
        },
        defaulted,
    })
}

impl Scenario {
    pub fn drive(&self, mirror: Mirror) -> Option<&MirrorDrive> {
        self.drives.iter().find(|d| d.mirror == mirror)
    }

    /// Fully explicit scenario text; parses back to an identical scenario.
    pub fn to_text(&self) -> String {
        // `{:?}` on f64 prints the shortest string that round-trips.
        let mut out = String::new();
        let _ = writeln!(out, "alignment = {}", self.alignment);
        let _ = writeln!(out, "sigma = {:?}", self.sigma);
        let _ = writeln!(out, "dt = {:?}", self.sampling.dt);
        let _ = writeln!(out, "duration = {:?}", self.sampling.duration);
        let outputs: Vec<&str> = self.outputs.iter().map(|o| o.keyword()).collect();
        let _ = writeln!(out, "outputs = {}", outputs.join(", "));
        for d in &self.drives {
            let _ = writeln!(out, "mirror {} frequency = {:?}", d.mirror, d.frequency);
            let _ = writeln!(out, "mirror {} amplitude = {:?}", d.mirror, d.amplitude);
            let _ = writeln!(out, "mirror {} phase = {:?}", d.mirror, d.phase);
        }
        for m in Mirror::ALL {
            let _ = writeln!(out, "tilt {m} = {:?}", self.snapshot.get(m));
        }
        let _ = writeln!(out, "grid span = {:?}", self.grid.span);
        let _ = writeln!(out, "grid points = {}", self.grid.points);
        out
    }
}
