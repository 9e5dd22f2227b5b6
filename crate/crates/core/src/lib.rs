//! Angular-spectrum model of a nested Mach–Zehnder interferometer whose exit
//! beam is read by a quad-cell detector while the mirrors vibrate.

pub mod detector;
pub mod dynamics;
pub mod interferometer;
pub mod quadrature;
pub mod smallsignal;
pub mod spectrum;

pub use detector::{quad_signal, quad_signal_quadrature, QuadCellSignal};
pub use dynamics::{
    default_drives, power_spectrum, simulate, tilts_at, DynamicsError, MirrorDrive, Peak, PowerSpectrum,
    Sampling, SignalTrace,
};
pub use interferometer::{AlignmentMode, InterferometerConfig, Mirror, PathWeights, SplitterSet, TiltVector};
pub use smallsignal::{analytic_coefficients, numeric_coefficients, NumericSensitivity, SensitivityVector};
pub use spectrum::{gaussian_amplitude, normalize_l2, BaseGaussian, BeamState, HalfLine, KGrid, Term};
