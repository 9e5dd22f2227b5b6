//! Angular spectra of a Gaussian beam along one transverse axis.
//!
//! A [`BeamState`] is an exact, finite sum of copies of one base Gaussian,
//! each carrying a signed real weight and a spectral shift. Every element of
//! the interferometer (splitter, tilted mirror, blocker, recombination) maps
//! this family onto itself, so no sampled propagation is needed. Grids only
//! appear for plotting and for the quadrature cross-checks.

use std::f64::consts::PI;

use log::warn;
use thiserror::Error;

use crate::quadrature::{self, Estimate, QuadratureError, Tolerance};

/// Half-width of the quadrature domain, in units of sigma.
pub const QUADRATURE_SPAN: f64 = 12.0;

/// Absolute quadrature tolerance, relative to the total power of the state.
pub const HALF_LINE_TOLERANCE: f64 = 1e-12;

/// Above this |shift|/sigma the first-order picture no longer holds.
pub const LINEAR_REGIME_LIMIT: f64 = 0.1;

/// Above this |shift|/sigma a state is rejected outright.
pub const SHIFT_ABORT_LIMIT: f64 = 1.0;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SpectrumError {
    #[error("spectral width must be positive and finite, got {0}")]
    InvalidSigma(f64),
    #[error("normalization factor must be positive and finite, got {0}")]
    InvalidNorm(f64),
    #[error("cannot superpose states built on different base Gaussians")]
    BaseMismatch,
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("shift {shift} exceeds sigma = {sigma}; small-tilt model does not apply")]
    ShiftOutOfRange { shift: f64, sigma: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// `N exp(-k^2 / sigma^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseGaussian {
    sigma: f64,
    norm: f64,
}

impl BaseGaussian {
    pub fn new(sigma: f64, norm: f64) -> Result<Self, SpectrumError> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(SpectrumError::InvalidSigma(sigma));
        }
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(SpectrumError::InvalidNorm(norm));
        }
        Ok(Self { sigma, norm })
    }

    /// Base with unit L² norm, `N = (2 / (pi sigma^2))^(1/4)`.
    pub fn normalized(sigma: f64) -> Result<Self, SpectrumError> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(SpectrumError::InvalidSigma(sigma));
        }
        Self::new(sigma, (2.0 / (PI * sigma * sigma)).powf(0.25))
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Beam waist `W = 2 / sigma` of the real-space profile.
    pub fn waist(&self) -> f64 {
        2.0 / self.sigma
    }

    #[inline]
    pub fn amplitude(&self, k: f64) -> f64 {
        let x = k / self.sigma;
        self.norm * (-x * x).exp()
    }

    /// `∫ |N exp(-k^2/sigma^2)|^2 dk` over the whole line.
    pub fn power(&self) -> f64 {
        self.norm * self.norm * self.sigma * (PI / 2.0).sqrt()
    }
}

pub fn gaussian_amplitude(base: &BaseGaussian, k: f64) -> f64 {
    base.amplitude(k)
}

pub fn normalize_l2(sigma: f64) -> Result<BaseGaussian, SpectrumError> {
    BaseGaussian::normalized(sigma)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub weight: f64,
    pub shift: f64,
}

impl Term {
    pub fn new(weight: f64, shift: f64) -> Self {
        Self { weight, shift }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfLine {
    Positive,
    Negative,
}

/// How far a state sits from the small-shift regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    Linear,
    /// Largest |shift|/sigma lies in (0.1, 1].
    Nonlinear { max_ratio: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamState {
    base: BaseGaussian,
    terms: Vec<Term>,
}

impl BeamState {
    /// The blocked beam.
    pub fn null(base: BaseGaussian) -> Self {
        Self {
            base,
            terms: Vec::new(),
        }
    }

    pub fn gaussian(base: BaseGaussian) -> Self {
        Self::from_terms(base, vec![Term::new(1.0, 0.0)])
    }

    pub fn from_terms(base: BaseGaussian, terms: Vec<Term>) -> Self {
        Self { base, terms }
    }

    pub fn base(&self) -> &BaseGaussian {
        &self.base
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_null(&self) -> bool {
        self.terms.is_empty()
    }

    /// Translates the spectrum by `kappa`, as a tilted mirror does.
    pub fn shift(&self, kappa: f64) -> Self {
        Self {
            base: self.base,
            terms: self
                .terms
                .iter()
                .map(|t| Term::new(t.weight, t.shift + kappa))
                .collect(),
        }
    }

    pub fn scale(&self, w: f64) -> Self {
        Self {
            base: self.base,
            terms: self
                .terms
                .iter()
                .map(|t| Term::new(t.weight * w, t.shift))
                .collect(),
        }
    }

    pub fn superpose(&self, other: &Self) -> Result<Self, SpectrumError> {
        if self.base != other.base {
            return Err(SpectrumError::BaseMismatch);
        }
        let mut terms = Vec::with_capacity(self.terms.len() + other.terms.len());
        terms.extend_from_slice(&self.terms);
        terms.extend_from_slice(&other.terms);
        Ok(Self {
            base: self.base,
            terms,
        })
    }

    /// Mirror image `k -> -k`.
    pub fn reflect(&self) -> Self {
        Self {
            base: self.base,
            terms: self
                .terms
                .iter()
                .map(|t| Term::new(t.weight, -t.shift))
                .collect(),
        }
    }

    #[inline]
    pub fn amplitude_at(&self, k: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.weight * self.base.amplitude(k - t.shift))
            .sum()
    }

    pub fn evaluate(&self, grid: &KGrid) -> Vec<f64> {
        grid.points().map(|k| self.amplitude_at(k)).collect()
    }

    pub fn max_abs_shift(&self) -> f64 {
        self.terms.iter().map(|t| t.shift.abs()).fold(0.0, f64::max)
    }

    /// Classifies the state against the small-shift guard, logging a warning
    /// in the nonlinear band and failing beyond one sigma.
    pub fn regime(&self) -> Result<Regime, SpectrumError> {
        let shift = self.max_abs_shift();
        let ratio = shift / self.base.sigma;
        if ratio > SHIFT_ABORT_LIMIT {
            Err(SpectrumError::ShiftOutOfRange {
                shift,
                sigma: self.base.sigma,
            })
        } else if ratio > LINEAR_REGIME_LIMIT {
            warn!("beam shift {shift:.3e} is {ratio:.3} sigma; linearized picture is not reliable");
            Ok(Regime::Nonlinear { max_ratio: ratio })
        } else {
            Ok(Regime::Linear)
        }
    }

    // Every pair (i, j) contributes N² w_i w_j exp(-(a-b)²/2σ²) times an
    // integral of exp(-2(k-m)²/σ²) with m = (a+b)/2.
    fn pair_sum(&self, kernel: impl Fn(f64) -> f64) -> f64 {
        let sigma = self.base.sigma;
        let n2 = self.base.norm * self.base.norm;
        let mut acc = 0.0;
        for a in &self.terms {
            for b in &self.terms {
                let d = (a.shift - b.shift) / sigma;
                let m = 0.5 * (a.shift + b.shift);
                acc += a.weight * b.weight * (-0.5 * d * d).exp() * kernel(m);
            }
        }
        n2 * acc
    }

    /// `∫ |psi|² dk` over the whole line, in closed form.
    pub fn total_power(&self) -> f64 {
        let c = self.base.sigma * (PI / 2.0).sqrt();
        self.pair_sum(|_| c).max(0.0)
    }

    /// `∫ |psi|² dk` over one half line, in closed form via erfc.
    pub fn half_line_power(&self, side: HalfLine) -> f64 {
        let sigma = self.base.sigma;
        let c = sigma * (PI / 8.0).sqrt();
        let s = std::f64::consts::SQRT_2 / sigma;
        let p = match side {
            HalfLine::Positive => self.pair_sum(|m| c * libm::erfc(-s * m)),
            HalfLine::Negative => self.pair_sum(|m| c * libm::erfc(s * m)),
        };
        p.max(0.0)
    }

    /// Upper-minus-lower half-line power, `∫ sgn(k) |psi|² dk`, in closed form.
    ///
    /// Evaluated directly through erf rather than as a difference of the two
    /// half-line powers so that small imbalances keep full relative precision.
    pub fn power_imbalance(&self) -> f64 {
        let sigma = self.base.sigma;
        let c = sigma * (PI / 2.0).sqrt();
        let s = std::f64::consts::SQRT_2 / sigma;
        self.pair_sum(|m| c * libm::erf(s * m))
    }

    /// Half-line power by adaptive quadrature on `[0, 12σ]` or `[-12σ, 0]`.
    pub fn half_line_power_quadrature(&self, side: HalfLine) -> Result<Estimate, SpectrumError> {
        if self.is_null() {
            return Ok(zero_estimate());
        }
        let span = QUADRATURE_SPAN * self.base.sigma;
        let (lo, hi) = match side {
            HalfLine::Positive => (0.0, span),
            HalfLine::Negative => (-span, 0.0),
        };
        let tol = Tolerance {
            absolute: HALF_LINE_TOLERANCE * self.total_power(),
            relative: 1e-14,
            magnitude: 0.0,
        };
        Ok(quadrature::integrate(
            |k| {
                let a = self.amplitude_at(k);
                a * a
            },
            lo,
            hi,
            tol,
        )?)
    }

    /// `∫_0^∞ (|psi(k)|² - |psi(-k)|²) dk` by adaptive quadrature.
    ///
    /// Integrating the odd part keeps the error budget relative to the
    /// imbalance itself instead of to the much larger half-line powers.
    pub fn power_imbalance_quadrature(&self) -> Result<Estimate, SpectrumError> {
        if self.is_null() {
            return Ok(zero_estimate());
        }
        let span = QUADRATURE_SPAN * self.base.sigma;
        // ψ(k) - ψ(-k) loses digits to cancellation, so the noise floor
        // follows the total power rather than the odd part.
        let tol = Tolerance {
            absolute: 1e-15 * self.total_power(),
            relative: 1e-13,
            magnitude: 1e-13,
        };
        Ok(quadrature::integrate(
            |k| {
                let up = self.amplitude_at(k);
                let down = self.amplitude_at(-k);
                (up - down) * (up + down)
            },
            0.0,
            span,
            tol,
        )?)
    }
}

fn zero_estimate() -> Estimate {
    Estimate {
        value: 0.0,
        error: 0.0,
        magnitude: 0.0,
        intervals: 0,
    }
}

/// Uniform sampling of the k axis, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KGrid {
    k_min: f64,
    k_max: f64,
    n: usize,
}

impl KGrid {
    pub fn new(k_min: f64, k_max: f64, n: usize) -> Result<Self, SpectrumError> {
        if !(k_min.is_finite() && k_max.is_finite()) {
            return Err(SpectrumError::InvalidGrid("bounds must be finite".into()));
        }
        if !(k_min < 0.0 && 0.0 < k_max) {
            return Err(SpectrumError::InvalidGrid(format!(
                "need k_min < 0 < k_max, got [{k_min}, {k_max}]"
            )));
        }
        if n < 2 {
            return Err(SpectrumError::InvalidGrid(format!("need at least 2 points, got {n}")));
        }
        Ok(Self { k_min, k_max, n })
    }

    pub fn symmetric(half_width: f64, n: usize) -> Result<Self, SpectrumError> {
        Self::new(-half_width, half_width, n)
    }

    pub fn k_min(&self) -> f64 {
        self.k_min
    }

    pub fn k_max(&self) -> f64 {
        self.k_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        (self.k_max - self.k_min) / (self.n - 1) as f64
    }

    pub fn point(&self, j: usize) -> f64 {
        if j + 1 == self.n {
            self.k_max
        } else {
            self.k_min + j as f64 * self.spacing()
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |j| self.point(j))
    }
}
