//! Truncated versions of the two reducibility schemes: straightening the
//! transport part to a constant coefficient, then diagonalizing the zero-order
//! remainder on the normal modes.

mod compose;
mod remainder;
mod remainder0;
mod toeplitz;
mod torus;
mod transport;

pub use compose::{compose_theta, invert_shift};
pub use remainder::{
    invert_diagonal, remainder_kam_run, remainder_kam_step, solve_remainder_homological, RemainderReport, RemainderStep,
};
pub use remainder0::{contour_remainder, ContourRemainder, ContourRemainderSetup};
pub use toeplitz::{normal_modes, offdiag_norm, DiagonalSpectrum, ToeplitzOperator};
pub use torus::{bracket_lj, fft_nd, TorusFunction, TorusGrid};
pub use transport::{
    conjugated_coefficient, conjugation_residual, homological_residual, manufactured_perturbation,
    solve_transport_homological, transport_kam_run, transport_kam_step, TransportIterate, TransportReport,
    TransportSolution, TransportStep,
};

use crate::cantor::CantorError;
use crate::contour::ContourError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KamError {
    #[error(transparent)]
    Params(#[from] CantorError),
    #[error(transparent)]
    Contour(#[from] ContourError),
    #[error("composition not invertible: max |∂_θ g| = {0}")]
    Composition(f64),
    #[error("aliased energy fraction {0:e} exceeds 1e-8")]
    Resolution(f64),
    #[error("norm grew on two consecutive steps (step {step}, history {history:?})")]
    Divergence { step: usize, history: Vec<f64> },
    #[error("Neumann series does not converge: |Ψ| = {0}")]
    Neumann(f64),
    #[error("reversibility defect {0:e} above 1e-12")]
    Reversibility(f64),
    #[error("{0}")]
    Config(String),
}

/// Even cut-off: 0 on `|x| ≤ 1/3`, 1 on `|x| ≥ 1/2`, quintic smoothstep (C²) between.
pub fn chi(x: f64) -> f64 {
    let a = x.abs();
    if a <= 1.0 / 3.0 {
        0.0
    } else if a >= 0.5 {
        1.0
    } else {
        let t = (a - 1.0 / 3.0) * 6.0;
        t * t * t * (10.0 + t * (6.0 * t - 15.0))
    }
}

/// `N_m = ⌊N₀^{(3/2)^m}⌋`, capped.
pub fn schedule(n0: u32, m: usize, cap: usize) -> usize {
    let v = (n0 as f64).powf(1.5f64.powi(m as i32));
    if v >= cap as f64 {
        cap
    } else {
        (v + 1e-9).floor() as usize
    }
}

/// Low Sobolev index `⌈(d+1)/2 + 2⌉`.
pub fn s0(d: usize) -> f64 {
    ((d as f64 + 1.0) / 2.0 + 2.0).ceil()
}

pub fn s_high(d: usize) -> f64 {
    s0(d) + 10.0
}

/// Abort when the monitored norm has increased on the last two steps.
pub(crate) fn check_divergence(history: &[f64]) -> Result<(), KamError> {
    let n = history.len();
    if n >= 3 && history[n - 1] > history[n - 2] && history[n - 2] > history[n - 3] {
        return Err(KamError::Divergence { step: n - 1, history: history.to_vec() });
    }
    Ok(())
}
