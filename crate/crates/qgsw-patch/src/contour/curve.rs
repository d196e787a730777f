//! Real zero-mean periodic curves `r(θ)` and the polar geometry built on them.

use crate::fourier;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CurveError {
    #[error("grid size {0} must be even and at least 8")]
    GridSize(usize),
    #[error("mode {j} does not fit a grid of {m} points")]
    Unresolved { j: usize, m: usize },
    #[error("smallness guard violated: max |r| = {0}")]
    Guard(f64),
    #[error("top-octave energy fraction {0:e} exceeds 1e-8")]
    Aliasing(f64),
    #[error("malformed curve file: {0}")]
    Format(String),
}

const ROUNDING_FLOOR: f64 = 1e-14;

/// `r(θ) = Σ_{j≥1} 2 Re(r_j e^{ijθ})`, with `coeffs[j-1] = r_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCurve {
    pub grid_size: usize,
    pub coeffs: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct CurveFile {
    grid_size: usize,
    coeffs: Vec<(i64, f64, f64)>,
}

impl FourierCurve {
    pub fn zero(grid_size: usize) -> Self {
        FourierCurve { grid_size, coeffs: vec![Complex64::new(0.0, 0.0); grid_size / 2 - 1] }
    }

    /// Build from `(j, r_j)` pairs; `j ≥ 1`.
    pub fn from_modes(grid_size: usize, modes: &[(usize, Complex64)]) -> Result<Self, CurveError> {
        if grid_size < 8 || grid_size % 2 == 1 {
            return Err(CurveError::GridSize(grid_size));
        }
        let mut c = FourierCurve::zero(grid_size);
        for &(j, a) in modes {
            if j == 0 || j > grid_size / 2 - 2 {
                return Err(CurveError::Unresolved { j, m: grid_size });
            }
            c.coeffs[j - 1] += a;
        }
        Ok(c)
    }

    /// `Σ a_j cos(jθ)`.
    pub fn cosines(grid_size: usize, amps: &[(usize, f64)]) -> Result<Self, CurveError> {
        let modes: Vec<_> = amps.iter().map(|&(j, a)| (j, Complex64::new(0.5 * a, 0.0))).collect();
        FourierCurve::from_modes(grid_size, &modes)
    }

    /// Project grid values: the mean and the Nyquist mode are dropped.
    pub fn from_grid(values: &[f64]) -> Self {
        let m = values.len();
        FourierCurve { grid_size: m, coeffs: fourier::grid_to_half(values, m / 2 - 1) }
    }

    pub fn to_grid(&self) -> Vec<f64> {
        fourier::half_to_grid(&self.coeffs, self.grid_size)
    }

    pub fn derivative_grid(&self) -> Vec<f64> {
        let d: Vec<Complex64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * Complex64::new(0.0, (i + 1) as f64))
            .collect();
        fourier::half_to_grid(&d, self.grid_size)
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * Complex64::new(0.0, (i + 1) as f64))
            .collect();
        FourierCurve { grid_size: self.grid_size, coeffs }
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let e1 = Complex64::from_polar(1.0, theta);
        let mut e = e1;
        let mut acc = 0.0;
        for c in &self.coeffs {
            acc += 2.0 * (c * e).re;
            e *= e1;
        }
        acc
    }

    pub fn eval_derivative(&self, theta: f64) -> f64 {
        self.derivative().eval(theta)
    }

    /// `r(· - θ₀)`.
    pub fn rotated(&self, theta0: f64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * Complex64::from_polar(1.0, -((i + 1) as f64) * theta0))
            .collect();
        FourierCurve { grid_size: self.grid_size, coeffs }
    }

    /// `r(-θ)`.
    pub fn reflected(&self) -> Self {
        FourierCurve { grid_size: self.grid_size, coeffs: self.coeffs.iter().map(|c| c.conj()).collect() }
    }

    pub fn scale(&self, a: f64) -> Self {
        FourierCurve { grid_size: self.grid_size, coeffs: self.coeffs.iter().map(|c| c * a).collect() }
    }

    pub fn axpy(&self, a: f64, other: &FourierCurve) -> Self {
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(x, y)| x + y * a).collect();
        FourierCurve { grid_size: self.grid_size, coeffs }
    }

    /// Same curve on another grid (truncating modes that no longer fit).
    pub fn regrid(&self, grid_size: usize) -> Self {
        let mut c = FourierCurve::zero(grid_size);
        for (dst, src) in c.coeffs.iter_mut().zip(&self.coeffs) {
            *dst = *src;
        }
        c
    }

    pub fn max_abs(&self) -> f64 {
        self.to_grid().iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// `max |r| < 1/2`.
    pub fn check_guard(&self) -> Result<(), CurveError> {
        let m = self.max_abs();
        if m < 0.5 {
            Ok(())
        } else {
            Err(CurveError::Guard(m))
        }
    }

    /// Fraction of `Σ|r_j|²` carried by modes above `M/4`. Top-octave content at
    /// the rounding floor of an O(1) geometry counts as zero.
    pub fn top_octave_fraction(&self) -> f64 {
        let total: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        let top: f64 = self.coeffs.iter().skip(self.grid_size / 4).map(|c| c.norm_sqr()).sum();
        if top <= ROUNDING_FLOOR * ROUNDING_FLOOR * self.grid_size as f64 {
            return 0.0;
        }
        top / total
    }

    pub fn check_resolution(&self) -> Result<(), CurveError> {
        let f = self.top_octave_fraction();
        if f > 1e-8 {
            Err(CurveError::Aliasing(f))
        } else {
            Ok(())
        }
    }

    pub fn to_json(&self) -> String {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|(i, c)| ((i + 1) as i64, c.re, c.im))
            .collect();
        serde_json::to_string_pretty(&CurveFile { grid_size: self.grid_size, coeffs }).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, CurveError> {
        let f: CurveFile = serde_json::from_str(text).map_err(|e| CurveError::Format(e.to_string()))?;
        if f.grid_size < 8 || f.grid_size % 2 == 1 {
            return Err(CurveError::GridSize(f.grid_size));
        }
        let mut c = FourierCurve::zero(f.grid_size);
        for (j, re, im) in f.coeffs {
            if j < 1 || j as usize > c.coeffs.len() {
                return Err(CurveError::Format(format!("mode index {j} outside 1..={}", c.coeffs.len())));
            }
            c.coeffs[j as usize - 1] = Complex64::new(re, im);
        }
        Ok(c)
    }
}

/// Grid values of `r`, `R = (1+2r)^{1/2}` and `R' = r'/R`.
#[derive(Debug, Clone)]
pub struct Geometry {
    pub m: usize,
    pub theta: Vec<f64>,
    pub r: Vec<f64>,
    pub big_r: Vec<f64>,
    pub big_r_prime: Vec<f64>,
}

impl Geometry {
    pub fn new(curve: &FourierCurve) -> Result<Self, CurveError> {
        curve.check_guard()?;
        let r = curve.to_grid();
        let dr = curve.derivative_grid();
        let big_r: Vec<f64> = r.iter().map(|x| (1.0 + 2.0 * x).sqrt()).collect();
        let big_r_prime = dr.iter().zip(&big_r).map(|(d, q)| d / q).collect();
        Ok(Geometry { m: curve.grid_size, theta: fourier::grid(curve.grid_size), r, big_r, big_r_prime })
    }
}

/// `R(θ_m) = (1 + 2r(θ_m))^{1/2}`.
pub fn radius_from_r(curve: &FourierCurve) -> Result<Vec<f64>, CurveError> {
    Ok(Geometry::new(curve)?.big_r)
}

/// `A_r(θ, η) = ((R(θ)-R(η))² + 4R(θ)R(η) sin²((η-θ)/2))^{1/2}`.
pub fn chord(curve: &FourierCurve, theta: f64, eta: f64) -> f64 {
    let a = (1.0 + 2.0 * curve.eval(theta)).sqrt();
    let b = (1.0 + 2.0 * curve.eval(eta)).sqrt();
    let s = (0.5 * (eta - theta)).sin();
    ((a - b) * (a - b) + 4.0 * a * b * s * s).sqrt()
}
