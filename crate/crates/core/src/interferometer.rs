//! Fixed nested Mach–Zehnder topology.
//!
//! The outer interferometer (BS1/BS4) has a direct arm through mirror C and
//! a long arm E → inner interferometer (BS2/BS3, mirrors A and B) → F. The
//! relative phase of the inner arms is folded into a single sign on the B
//! path: `-1` for destructive alignment toward F, `+1` for constructive.

use std::fmt;
use std::str::FromStr;

use crate::spectrum::{BaseGaussian, BeamState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mirror {
    A,
    B,
    C,
    E,
    F,
}

impl Mirror {
    pub const ALL: [Mirror; 5] = [Mirror::A, Mirror::B, Mirror::C, Mirror::E, Mirror::F];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Mirror::A => "A",
            Mirror::B => "B",
            Mirror::C => "C",
            Mirror::E => "E",
            Mirror::F => "F",
        }
    }
}

impl fmt::Display for Mirror {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownMirror(pub String);

impl fmt::Display for UnknownMirror {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown mirror `{}` (expected one of A, B, C, E, F)", self.0)
    }
}

impl std::error::Error for UnknownMirror {}

impl FromStr for Mirror {
    type Err = UnknownMirror;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "A" => Ok(Mirror::A),
            "B" => Ok(Mirror::B),
            "C" => Ok(Mirror::C),
            "E" => Ok(Mirror::E),
            "F" => Ok(Mirror::F),
            _ => Err(UnknownMirror(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlignmentMode {
    /// Inner interferometer sends its light toward F.
    ConstructiveInner,
    /// Inner interferometer cancels toward F.
    DestructiveInner,
    /// As `DestructiveInner`, with the C arm blocked.
    DestructiveInnerBlockedC,
}

impl AlignmentMode {
    pub const ALL: [AlignmentMode; 3] = [
        AlignmentMode::ConstructiveInner,
        AlignmentMode::DestructiveInner,
        AlignmentMode::DestructiveInnerBlockedC,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            AlignmentMode::ConstructiveInner => "constructive",
            AlignmentMode::DestructiveInner => "destructive",
            AlignmentMode::DestructiveInnerBlockedC => "blocked-c",
        }
    }

    /// Sign carried by the B arm at the inner exit.
    pub fn inner_sign(self) -> f64 {
        match self {
            AlignmentMode::ConstructiveInner => 1.0,
            AlignmentMode::DestructiveInner | AlignmentMode::DestructiveInnerBlockedC => -1.0,
        }
    }

    pub fn c_arm_open(self) -> bool {
        !matches!(self, AlignmentMode::DestructiveInnerBlockedC)
    }
}

impl fmt::Display for AlignmentMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownAlignment(pub String);

impl fmt::Display for UnknownAlignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "unknown alignment `{}` (expected one of constructive, destructive, blocked-c)",
            self.0
        )
    }
}

impl std::error::Error for UnknownAlignment {}

impl FromStr for AlignmentMode {
    type Err = UnknownAlignment;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AlignmentMode::ALL
            .into_iter()
            .find(|m| m.keyword() == s)
            .ok_or_else(|| UnknownAlignment(s.to_string()))
    }
}

/// Amplitude moduli of the four splitters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitterSet {
    /// BS1/BS4 reflection, `sqrt(2/3)`.
    pub r_outer: f64,
    /// BS1/BS4 transmission, `sqrt(1/3)`.
    pub t_outer: f64,
    /// BS2/BS3 reflection and transmission, `1/sqrt(2)`.
    pub rt_inner: f64,
}

impl Default for SplitterSet {
    fn default() -> Self {
        Self {
            r_outer: (2.0f64 / 3.0).sqrt(),
            t_outer: (1.0f64 / 3.0).sqrt(),
            rt_inner: std::f64::consts::FRAC_1_SQRT_2,
        }
    }
}

impl SplitterSet {
    /// Lossless check on both splitter pairs.
    pub fn is_lossless(&self, tol: f64) -> bool {
        (self.r_outer.powi(2) + self.t_outer.powi(2) - 1.0).abs() <= tol
            && (2.0 * self.rt_inner.powi(2) - 1.0).abs() <= tol
    }
}

/// Instantaneous spectral shift imparted by each mirror.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TiltVector {
    kappa: [f64; 5],
}

impl TiltVector {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn new(a: f64, b: f64, c: f64, e: f64, f: f64) -> Self {
        Self {
            kappa: [a, b, c, e, f],
        }
    }

    pub fn single(mirror: Mirror, kappa: f64) -> Self {
        Self::zero().with(mirror, kappa)
    }

    pub fn get(&self, mirror: Mirror) -> f64 {
        self.kappa[mirror.index()]
    }

    pub fn set(&mut self, mirror: Mirror, kappa: f64) {
        self.kappa[mirror.index()] = kappa;
    }

    pub fn with(mut self, mirror: Mirror, kappa: f64) -> Self {
        self.set(mirror, kappa);
        self
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            kappa: self.kappa.map(|k| k * c),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.kappa.iter().fold(0.0, |m, k| m.max(k.abs()))
    }
}

/// Exit amplitudes toward D per route, before any tilt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathWeights {
    pub c: f64,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferometerConfig {
    pub splitters: SplitterSet,
    pub alignment: AlignmentMode,
    pub base: BaseGaussian,
}

impl InterferometerConfig {
    pub fn new(alignment: AlignmentMode, base: BaseGaussian) -> Self {
        Self {
            splitters: SplitterSet::default(),
            alignment,
            base,
        }
    }

    /// Amplitude of one inner route from the source to just after F.
    fn inner_route(&self) -> f64 {
        self.splitters.r_outer * self.splitters.rt_inner * self.splitters.rt_inner
    }

    pub fn path_weights(&self) -> PathWeights {
        let s = &self.splitters;
        let inner = self.inner_route() * s.r_outer;
        PathWeights {
            c: if self.alignment.c_arm_open() {
                s.t_outer * s.t_outer
            } else {
                0.0
            },
            a: inner,
            b: self.alignment.inner_sign() * inner,
        }
    }

    /// The A-route and B-route beams arriving just after F, before the
    /// alignment sign is applied.
    pub fn inner_routes(&self, tilts: &TiltVector) -> (BeamState, BeamState) {
        let rt = self.splitters.rt_inner;
        let after_e = BeamState::gaussian(self.base)
            .scale(self.splitters.r_outer)
            .shift(tilts.get(Mirror::E));
        let route = |m: Mirror| {
            after_e
                .scale(rt)
                .shift(tilts.get(m))
                .scale(rt)
                .shift(tilts.get(Mirror::F))
        };
        (route(Mirror::A), route(Mirror::B))
    }

    /// Beam just after mirror F.
    pub fn psi_f(&self, tilts: &TiltVector) -> BeamState {
        let (via_a, via_b) = self.inner_routes(tilts);
        via_a
            .superpose(&via_b.scale(self.alignment.inner_sign()))
            .expect("routes share one base")
    }

    /// Beam arriving at the quad cell.
    pub fn psi_d(&self, tilts: &TiltVector) -> BeamState {
        let t = self.splitters.t_outer;
        let from_c = if self.alignment.c_arm_open() {
            BeamState::gaussian(self.base).scale(t).shift(tilts.get(Mirror::C)).scale(t)
        } else {
            BeamState::null(self.base)
        };
        let from_f = self.psi_f(tilts).scale(self.splitters.r_outer);
        from_c.superpose(&from_f).expect("routes share one base")
    }

}
