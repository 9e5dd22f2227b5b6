//! Vibrating mirrors, sampled quad-cell signal and its power spectrum.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use log::warn;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use thiserror::Error;

use crate::detector::quad_signal;
use crate::interferometer::{InterferometerConfig, Mirror, TiltVector};
use crate::spectrum::{BaseGaussian, BeamState, LINEAR_REGIME_LIMIT, SHIFT_ABORT_LIMIT};

/// Default drive frequencies for A, B, C, E, F: distinct primes, no low-order
/// harmonic relations.
pub const DEFAULT_FREQUENCIES: [(Mirror, f64); 5] = [
    (Mirror::A, 283.0),
    (Mirror::B, 311.0),
    (Mirror::C, 337.0),
    (Mirror::E, 353.0),
    (Mirror::F, 397.0),
];

/// Default tilt amplitude, as a fraction of sigma.
pub const DEFAULT_AMPLITUDE_RATIO: f64 = 1e-3;

/// Harmonic orders checked when validating a drive set.
pub const MAX_HARMONIC: u32 = 4;

pub const MIN_PERIODS: f64 = 20.0;
pub const MIN_SAMPLES_PER_PERIOD: f64 = 10.0;
pub const DEFAULT_PERIODS: f64 = 64.0;
pub const DEFAULT_SAMPLES_PER_PERIOD: f64 = 16.0;

pub const MIN_SPECTRUM_SAMPLES: usize = 16;

/// A peak counts as present when it reaches this fraction of the
/// reference peak (see [`reference_peak_power`]).
pub const DETECTION_FRACTION: f64 = 1e-6;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DynamicsError {
    #[error("mirror {mirror}: {reason}")]
    InvalidDrive { mirror: Mirror, reason: String },
    #[error("mirror {0} is listed more than once")]
    DuplicateDrive(Mirror),
    #[error("drive frequencies of {a} ({fa}) and {b} ({fb}) are harmonically related (order {order})")]
    HarmonicDrives {
        a: Mirror,
        fa: f64,
        b: Mirror,
        fb: f64,
        order: u32,
    },
    #[error("invalid sampling: {0}")]
    InvalidSampling(String),
    #[error("tilt amplitudes reach {shift:.3e}, beyond sigma = {sigma}")]
    TiltOutOfRange { shift: f64, sigma: f64 },
    #[error("signal became non-finite at t = {t}")]
    NonFiniteSignal { t: f64 },
    #[error("trace has {got} samples; the spectrum needs at least {need}")]
    TraceTooShort { got: usize, need: usize },
    #[error("mirror {0} is not driven in this run")]
    Undriven(Mirror),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MirrorDrive {
    pub mirror: Mirror,
    pub frequency: f64,
    pub amplitude: f64,
    pub phase: f64,
}

impl MirrorDrive {
    pub fn new(mirror: Mirror, frequency: f64, amplitude: f64, phase: f64) -> Result<Self, DynamicsError> {
        let bad = |reason: &str| DynamicsError::InvalidDrive {
            mirror,
            reason: reason.to_string(),
        };
        if !(frequency > 0.0 && frequency.is_finite()) {
            return Err(bad("frequency must be positive and finite"));
        }
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(bad("amplitude must be non-negative and finite"));
        }
        if !phase.is_finite() {
            return Err(bad("phase must be finite"));
        }
        Ok(Self {
            mirror,
            frequency,
            amplitude,
            phase,
        })
    }

    pub fn is_driven(&self) -> bool {
        self.amplitude > 0.0
    }

    pub fn tilt_at(&self, t: f64) -> f64 {
        self.amplitude * (2.0 * PI * self.frequency * t + self.phase).sin()
    }
}

/// All five mirrors at the default frequencies, amplitude `1e-3 sigma`.
pub fn default_drives(sigma: f64) -> Vec<MirrorDrive> {
    DEFAULT_FREQUENCIES
        .iter()
        .map(|&(mirror, frequency)| MirrorDrive {
            mirror,
            frequency,
            amplitude: DEFAULT_AMPLITUDE_RATIO * sigma,
            phase: 0.0,
        })
        .collect()
}

/// Checks per-drive fields, uniqueness, and that no frequency is a low-order
/// multiple of another.
pub fn validate_drives(drives: &[MirrorDrive]) -> Result<(), DynamicsError> {
    for d in drives {
        MirrorDrive::new(d.mirror, d.frequency, d.amplitude, d.phase)?;
    }
    for (i, a) in drives.iter().enumerate() {
        for b in &drives[i + 1..] {
            if a.mirror == b.mirror {
                return Err(DynamicsError::DuplicateDrive(a.mirror));
            }
            let (lo, hi, m_lo, m_hi) = if a.frequency <= b.frequency {
                (a.frequency, b.frequency, a.mirror, b.mirror)
            } else {
                (b.frequency, a.frequency, b.mirror, a.mirror)
            };
            for order in 1..=MAX_HARMONIC {
                if (hi - order as f64 * lo).abs() <= 1e-9 * hi {
                    return Err(DynamicsError::HarmonicDrives {
                        a: m_lo,
                        fa: lo,
                        b: m_hi,
                        fb: hi,
                        order,
                    });
                }
            }
        }
    }
    Ok(())
}

pub fn tilts_at(drives: &[MirrorDrive], t: f64) -> TiltVector {
    let mut tilts = TiltVector::zero();
    for d in drives {
        tilts.set(d.mirror, tilts.get(d.mirror) + d.tilt_at(t));
    }
    tilts
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sampling {
    pub dt: f64,
    pub duration: f64,
}

fn frequency_range(drives: &[MirrorDrive]) -> Option<(f64, f64)> {
    let driven: Vec<f64> = drives.iter().filter(|d| d.is_driven()).map(|d| d.frequency).collect();
    let pool: Vec<f64> = if driven.is_empty() {
        drives.iter().map(|d| d.frequency).collect()
    } else {
        driven
    };
    if pool.is_empty() {
        return None;
    }
    let lo = pool.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = pool.iter().copied().fold(0.0, f64::max);
    Some((lo, hi))
}

impl Sampling {
    /// `dt = 1/(16 f_max)`; duration is 64 slowest periods rounded up to a
    /// whole time unit, which puts integer drive frequencies on DFT bins.
    pub fn default_for(drives: &[MirrorDrive]) -> Self {
        let (lo, hi) = frequency_range(drives).unwrap_or((1.0, 1.0));
        let dt = 1.0 / (DEFAULT_SAMPLES_PER_PERIOD * hi);
        let duration = (DEFAULT_PERIODS / lo).ceil();
        Self { dt, duration }
    }

    pub fn sample_count(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    pub fn validate(&self, drives: &[MirrorDrive]) -> Result<(), DynamicsError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(DynamicsError::InvalidSampling(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(DynamicsError::InvalidSampling(format!(
                "duration must be positive, got {}",
                self.duration
            )));
        }
        if let Some((lo, hi)) = frequency_range(drives) {
            let dt_max = 1.0 / (MIN_SAMPLES_PER_PERIOD * hi);
            if self.dt >= dt_max {
                return Err(DynamicsError::InvalidSampling(format!(
                    "dt = {} violates dt < 1/(10 f_max) = {dt_max}",
                    self.dt
                )));
            }
            let min_duration = MIN_PERIODS / lo;
            if self.duration < min_duration {
                return Err(DynamicsError::InvalidSampling(format!(
                    "duration = {} violates duration >= 20/f_min = {min_duration}",
                    self.duration
                )));
            }
        }
        if self.sample_count() < 2 {
            return Err(DynamicsError::InvalidSampling("fewer than 2 samples".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalTrace {
    pub dt: f64,
    pub samples: Vec<f64>,
}

impl SignalTrace {
    pub fn duration(&self) -> f64 {
        self.dt * self.samples.len() as f64
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.samples.len()).map(move |j| j as f64 * self.dt)
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.abs()))
    }
}

/// Largest spectral shift any route can reach, given drive amplitudes.
fn worst_case_shift(drives: &[MirrorDrive]) -> f64 {
    let mut amp = [0.0; 5];
    for d in drives {
        amp[d.mirror.index()] += d.amplitude;
    }
    let [a, b, c, e, f] = amp;
    c.max(e + a.max(b) + f)
}

pub fn simulate(
    config: &InterferometerConfig,
    drives: &[MirrorDrive],
    sampling: Sampling,
) -> Result<SignalTrace, DynamicsError> {
    validate_drives(drives)?;
    sampling.validate(drives)?;

    let sigma = config.base.sigma();
    let shift = worst_case_shift(drives);
    if shift > SHIFT_ABORT_LIMIT * sigma {
        return Err(DynamicsError::TiltOutOfRange { shift, sigma });
    }
    if shift > LINEAR_REGIME_LIMIT * sigma {
        warn!("drive amplitudes reach {:.3} sigma; outside the small-tilt regime", shift / sigma);
    }

    let n = sampling.sample_count();
    let samples = (0..n)
        .map(|j| {
            let t = j as f64 * sampling.dt;
            let s = quad_signal(&config.psi_d(&tilts_at(drives, t))).value();
            if s.is_finite() {
                Ok(s)
            } else {
                Err(DynamicsError::NonFiniteSignal { t })
            }
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(SignalTrace {
        dt: sampling.dt,
        samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub mirror: Mirror,
    pub drive_frequency: f64,
    pub bin: usize,
    pub frequency: f64,
    pub power: f64,
    pub floor_ratio: f64,
}

/// One-sided, amplitude-calibrated power spectrum: a sinusoid of amplitude
/// `a` centred on a bin reads `a²` there.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrum {
    pub frequencies: Vec<f64>,
    pub power: Vec<f64>,
    /// Median power over bins away from every drive frequency.
    pub floor: f64,
    pub peaks: BTreeMap<Mirror, Peak>,
    bin_width: f64,
}

fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| 0.5 - 0.5 * (2.0 * PI * j as f64 / n as f64).cos())
        .collect()
}

fn median(mut values: Vec<f64>) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    }
}

pub fn power_spectrum(trace: &SignalTrace, drives: &[MirrorDrive]) -> Result<PowerSpectrum, DynamicsError> {
    let n = trace.samples.len();
    if n < MIN_SPECTRUM_SAMPLES {
        return Err(DynamicsError::TraceTooShort {
            got: n,
            need: MIN_SPECTRUM_SAMPLES,
        });
    }

    let window = hann(n);
    let gain: f64 = window.iter().sum();
    let mut buf: Vec<Complex<f64>> = trace
        .samples
        .iter()
        .zip(&window)
        .map(|(s, w)| Complex::new(s * w, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let half = n / 2;
    let bin_width = 1.0 / (n as f64 * trace.dt);
    let frequencies: Vec<f64> = (0..=half).map(|k| k as f64 * bin_width).collect();
    let power: Vec<f64> = buf[..=half]
        .iter()
        .enumerate()
        .map(|(k, x)| {
            let one_sided = if k == 0 || (n.is_multiple_of(2) && k == half) { 1.0 } else { 2.0 };
            (one_sided * x.norm() / gain).powi(2)
        })
        .collect();

    let driven: Vec<&MirrorDrive> = drives.iter().filter(|d| d.is_driven()).collect();
    let nearest = |f: f64| ((f / bin_width).round() as usize).min(half);

    let mut reserved = vec![false; half + 1];
    for d in &driven {
        let k0 = nearest(d.frequency);
        reserved[k0.saturating_sub(1)..=(k0 + 1).min(half)].fill(true);
    }
    let floor = median(
        power
            .iter()
            .zip(&reserved)
            .filter(|(_, &r)| !r)
            .map(|(&p, _)| p)
            .collect(),
    );

    let mut peaks = BTreeMap::new();
    for d in driven {
        let k0 = nearest(d.frequency);
        let (bin, p) = (k0.saturating_sub(1)..=(k0 + 1).min(half))
            .map(|k| (k, power[k]))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty bin range");
        let floor_ratio = if floor > 0.0 {
            p / floor
        } else if p > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        peaks.insert(
            d.mirror,
            Peak {
                mirror: d.mirror,
                drive_frequency: d.frequency,
                bin,
                frequency: frequencies[bin],
                power: p,
                floor_ratio,
            },
        );
    }

    Ok(PowerSpectrum {
        frequencies,
        power,
        floor,
        peaks,
        bin_width,
    })
}

impl PowerSpectrum {
    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn peak(&self, mirror: Mirror) -> Result<&Peak, DynamicsError> {
        self.peaks.get(&mirror).ok_or(DynamicsError::Undriven(mirror))
    }

    pub fn peak_ratio(&self, numerator: Mirror, denominator: Mirror) -> Result<f64, DynamicsError> {
        Ok(self.peak(numerator)?.power / self.peak(denominator)?.power)
    }

    /// Largest power within one bin of `frequency`.
    pub fn power_near(&self, frequency: f64) -> f64 {
        let half = self.power.len() - 1;
        let k0 = ((frequency / self.bin_width).round() as usize).min(half);
        (k0.saturating_sub(1)..=(k0 + 1).min(half))
            .map(|k| self.power[k])
            .fold(0.0, f64::max)
    }

    /// Driven mirrors whose peak reaches `threshold`.
    pub fn detected(&self, threshold: f64) -> Vec<Mirror> {
        self.peaks
            .values()
            .filter(|p| p.power >= threshold && p.power > self.floor)
            .map(|p| p.mirror)
            .collect()
    }
}

/// Spectral peak the undivided input beam would produce if tilted back and
/// forth by `amplitude`; the scale against which peaks are called present.
pub fn reference_peak_power(base: &BaseGaussian, amplitude: f64) -> f64 {
    quad_signal(&BeamState::gaussian(*base).shift(amplitude)).value().powi(2)
}

pub fn detection_threshold(base: &BaseGaussian, drives: &[MirrorDrive]) -> f64 {
    let amplitude = drives.iter().map(|d| d.amplitude).fold(0.0, f64::max);
    DETECTION_FRACTION * reference_peak_power(base, amplitude)
}
