//! First-order sensitivity of the quad-cell signal to each mirror tilt.
//!
//! Linearizing every shifted Gaussian around zero shift collapses the exit
//! beam onto one Gaussian displaced by a weighted sum of tilts. The weights
//! are small integers per alignment; [`numeric_coefficients`] recovers them
//! from central differences of the full signal.

use thiserror::Error;

use crate::detector::quad_signal;
use crate::interferometer::{AlignmentMode, InterferometerConfig, Mirror, TiltVector};

/// Largest finite-difference step, as a fraction of sigma.
pub const MAX_EPSILON_RATIO: f64 = 1e-3;
pub const DEFAULT_EPSILON_RATIO: f64 = 1e-4;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SmallSignalError {
    #[error("finite-difference step {epsilon} outside (0, {max}]")]
    EpsilonOutOfRange { epsilon: f64, max: f64 },
}

/// Coefficients `c_i` with `S ≈ K Σ c_i κ_i`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SensitivityVector {
    coeffs: [f64; 5],
}

impl SensitivityVector {
    pub fn new(a: f64, b: f64, c: f64, e: f64, f: f64) -> Self {
        Self {
            coeffs: [a, b, c, e, f],
        }
    }

    pub fn get(&self, mirror: Mirror) -> f64 {
        self.coeffs[mirror.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (Mirror, f64)> + '_ {
        Mirror::ALL.into_iter().map(move |m| (m, self.get(m)))
    }

    pub fn dot(&self, tilts: &TiltVector) -> f64 {
        self.iter().map(|(m, c)| c * tilts.get(m)).sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            coeffs: self.coeffs.map(|c| c * s),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

pub fn analytic_coefficients(alignment: AlignmentMode) -> SensitivityVector {
    match alignment {
        AlignmentMode::DestructiveInner => SensitivityVector::new(1.0, -1.0, 1.0, 0.0, 0.0),
        AlignmentMode::ConstructiveInner => SensitivityVector::new(1.0, 1.0, 1.0, 2.0, 2.0),
        AlignmentMode::DestructiveInnerBlockedC => SensitivityVector::default(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericSensitivity {
    /// Normalized to `c_C = 1` when C is live, raw derivatives otherwise.
    pub coefficients: SensitivityVector,
    /// `dS/dκ` per mirror before normalization.
    pub raw: SensitivityVector,
    /// Gain `K` in `S ≈ K Σ c_i κ_i`; `None` when nothing could anchor it.
    pub gain: Option<f64>,
    pub epsilon: f64,
}

/// Central differences `[S(+ε e_i) - S(-ε e_i)] / 2ε` for each mirror.
pub fn numeric_coefficients(
    config: &InterferometerConfig,
    epsilon: f64,
) -> Result<NumericSensitivity, SmallSignalError> {
    let max = MAX_EPSILON_RATIO * config.base.sigma();
    if !(epsilon > 0.0 && epsilon <= max) {
        return Err(SmallSignalError::EpsilonOutOfRange { epsilon, max });
    }

    let signal = |t: TiltVector| quad_signal(&config.psi_d(&t)).value();
    let mut raw = [0.0; 5];
    for m in Mirror::ALL {
        let up = signal(TiltVector::single(m, epsilon));
        let down = signal(TiltVector::single(m, -epsilon));
        raw[m.index()] = (up - down) / (2.0 * epsilon);
    }
    let raw = SensitivityVector { coeffs: raw };

    let gain = if config.alignment.c_arm_open() {
        Some(raw.get(Mirror::C))
    } else {
        None
    };
    let coefficients = match gain {
        Some(k) if k != 0.0 => raw.scaled(1.0 / k),
        _ => raw,
    };
    Ok(NumericSensitivity {
        coefficients,
        raw,
        gain,
        epsilon,
    })
}

/// Gain `K` fitted from a single probe tilt against the analytic coefficients.
pub fn fit_gain(config: &InterferometerConfig, probe: &TiltVector) -> Option<f64> {
    let projected = analytic_coefficients(config.alignment).dot(probe);
    if projected == 0.0 {
        return None;
    }
    Some(quad_signal(&config.psi_d(probe)).value() / projected)
}
