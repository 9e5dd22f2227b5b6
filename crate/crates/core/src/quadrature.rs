//! Adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Used as the independent route for beam-power integrals; the closed-form
//! erf expressions in [`crate::spectrum`] are checked against it.

#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

// Kronrod abscissae on [0, 1]; odd indices are shared with the 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

pub const DEFAULT_MAX_INTERVALS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub absolute: f64,
    /// Relative to the integral itself.
    pub relative: f64,
    /// Relative to the integral of `|f|`, for integrands that change sign.
    pub magnitude: f64,
}

impl Tolerance {
    pub fn absolute(absolute: f64) -> Self {
        Self {
            absolute,
            relative: 0.0,
            magnitude: 0.0,
        }
    }

    fn target(&self, value: f64, magnitude: f64) -> f64 {
        self.absolute
            .max(self.relative * value.abs())
            .max(self.magnitude * magnitude)
    }
}

// Per-segment error never drops below this multiple of eps * ∫|f|.
const ROUNDOFF_FACTOR: f64 = 4.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    /// `∫ |f|`.
    pub magnitude: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum QuadratureError {
    #[error(
        "quadrature did not converge after {intervals} subintervals: \
         achieved error {achieved:.3e}, requested {requested:.3e}"
    )]
    NotConverged {
        achieved: f64,
        requested: f64,
        intervals: usize,
    },
    #[error("integrand produced a non-finite value at k = {at}")]
    NonFinite { at: f64 },
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
    magnitude: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Result<Segment, QuadratureError> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);

    let eval = |x: f64| {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(QuadratureError::NonFinite { at: x })
        }
    };

    let f_center = eval(center)?;
    let mut kronrod = f_center * WGK[7];
    let mut gauss = f_center * WG[3];
    let mut abs_sum = f_center.abs() * WGK[7];
    for (j, (&x, &wk)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let (left, right) = (eval(center - dx)?, eval(center + dx)?);
        let pair = left + right;
        kronrod += wk * pair;
        abs_sum += wk * (left.abs() + right.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }

    let magnitude = abs_sum * half.abs();
    Ok(Segment {
        lo,
        hi,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs().max(ROUNDOFF_FACTOR * magnitude),
        magnitude,
    })
}

/// Integrates `f` over `[lo, hi]`, bisecting the worst subinterval until the
/// summed error estimate meets `tol`.
pub fn integrate<F>(f: F, lo: f64, hi: f64, tol: Tolerance) -> Result<Estimate, QuadratureError>
where
    F: Fn(f64) -> f64,
{
    integrate_with_limit(f, lo, hi, tol, DEFAULT_MAX_INTERVALS)
}

pub fn integrate_with_limit<F>(
    f: F,
    lo: f64,
    hi: f64,
    tol: Tolerance,
    max_intervals: usize,
) -> Result<Estimate, QuadratureError>
where
    F: Fn(f64) -> f64,
{
    if lo == hi {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
            magnitude: 0.0,
            intervals: 0,
        });
    }

    let first = kronrod15(&f, lo, hi)?;
    let mut value = first.value;
    let mut error = first.error;
    let mut magnitude = first.magnitude;
    let mut heap = BinaryHeap::new();
    heap.push(first);

    while error > tol.target(value, magnitude) {
        if heap.len() >= max_intervals.max(1) {
            return Err(QuadratureError::NotConverged {
                achieved: error,
                requested: tol.target(value, magnitude),
                intervals: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap holds at least one segment");
        let mid = 0.5 * (worst.lo + worst.hi);
        let left = kronrod15(&f, worst.lo, mid)?;
        let right = kronrod15(&f, mid, worst.hi)?;

        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        magnitude += left.magnitude + right.magnitude - worst.magnitude;
        heap.push(left);
        heap.push(right);

        // Re-sum once the running totals could have drifted from cancellation.
        if error <= tol.target(value, magnitude) {
            value = heap.iter().map(|s| s.value).sum();
            error = heap.iter().map(|s| s.error).sum();
            magnitude = heap.iter().map(|s| s.magnitude).sum();
        }
    }

    Ok(Estimate {
        value,
        error,
        magnitude,
        intervals: heap.len(),
    })
}
