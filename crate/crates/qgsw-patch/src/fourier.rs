//! FFT plumbing for real periodic grid functions.
//!
//! Conventions: grid `θ_m = 2πm/M`, coefficients `c_k = (1/M) Σ_m u(θ_m) e^{-ikθ_m}`,
//! so `u(θ) = Σ_k c_k e^{ikθ}`.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::sync::Arc;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub fn forward_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n))
}

pub fn inverse_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n))
}

/// Full normalized spectrum `c_k`, stored in FFT order (k = 0..M-1, negative k wrapped).
pub fn spectrum(values: &[f64]) -> Vec<Complex64> {
    let n = values.len();
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward_plan(n).process(&mut buf);
    let s = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= s);
    buf
}

/// Inverse of [`spectrum`], keeping the real part.
pub fn synthesize(spec: &[Complex64]) -> Vec<f64> {
    let mut buf = spec.to_vec();
    inverse_plan(buf.len()).process(&mut buf);
    buf.iter().map(|c| c.re).collect()
}

/// Signed wavenumber of FFT slot `i` on an `n`-point grid. The Nyquist slot maps to `+n/2`.
#[inline]
pub fn wavenumber(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Grid values of `Σ_{j=1}^{K} 2 Re(c_j e^{ijθ})` for half-spectrum `c_1..c_K`.
pub fn half_to_grid(half: &[Complex64], n: usize) -> Vec<f64> {
    assert!(half.len() < n / 2 + 1, "half spectrum does not fit the grid");
    let mut spec = vec![Complex64::new(0.0, 0.0); n];
    for (idx, &c) in half.iter().enumerate() {
        let j = idx + 1;
        spec[j] += c;
        spec[n - j] += c.conj();
    }
    synthesize(&spec)
}

/// Half-spectrum `c_1..c_kmax` of grid values.
pub fn grid_to_half(values: &[f64], kmax: usize) -> Vec<Complex64> {
    let n = values.len();
    assert!(kmax < n / 2, "kmax must stay below the Nyquist index");
    let spec = spectrum(values);
    spec[1..=kmax].to_vec()
}

/// Spectral θ-derivative of grid values. The Nyquist mode is dropped.
pub fn derivative(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut spec = spectrum(values);
    for (i, c) in spec.iter_mut().enumerate() {
        let k = wavenumber(i, n);
        if 2 * k.unsigned_abs() as usize == n {
            *c = Complex64::new(0.0, 0.0);
        } else {
            *c *= Complex64::new(0.0, k as f64);
        }
    }
    synthesize(&spec)
}

/// Evaluate the trigonometric interpolant with spectrum `spec` (FFT order) at an
/// arbitrary angle. The Nyquist term enters as a cosine so real data stays real.
pub fn eval_spectrum(spec: &[Complex64], theta: f64) -> f64 {
    let n = spec.len();
    let mut acc = spec[0].re;
    let e1 = Complex64::from_polar(1.0, theta);
    let mut e = e1;
    for k in 1..n.div_ceil(2) {
        acc += 2.0 * (spec[k] * e).re;
        e *= e1;
    }
    if n % 2 == 0 {
        let k = n / 2;
        acc += (spec[k] * Complex64::from_polar(1.0, k as f64 * theta)).re;
    }
    acc
}

/// Trapezoid mean over the grid.
pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Normalized L² inner product `(1/M) Σ u v`.
pub fn inner(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() / u.len() as f64
}

pub fn grid(n: usize) -> Vec<f64> {
    (0..n)
        .map(|m| 2.0 * std::f64::consts::PI * m as f64 / n as f64)
        .collect()
}
