//! Quad-cell readout.
//!
//! At the detector the far field maps `k_y` linearly onto height, so the
//! upper and lower cells integrate `|psi|²` over `k > 0` and `k < 0`. The
//! proportionality constant and the mapping scale are both taken as 1.

use crate::spectrum::{BeamState, SpectrumError};

/// Upper-minus-lower detected power, in the units of `|psi|² dk`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct QuadCellSignal(pub f64);

impl QuadCellSignal {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Closed-form signal (erf of the pairwise Gaussian products).
pub fn quad_signal(state: &BeamState) -> QuadCellSignal {
    QuadCellSignal(state.power_imbalance())
}

/// Same signal by adaptive quadrature; kept as the independent route.
pub fn quad_signal_quadrature(state: &BeamState) -> Result<QuadCellSignal, SpectrumError> {
    Ok(QuadCellSignal(state.power_imbalance_quadrature()?.value))
}
