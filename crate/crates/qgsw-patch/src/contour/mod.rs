//! Polar contour dynamics for the patch boundary `R(θ) = (1 + 2r(θ))^{1/2}`.
//!
//! All integrals use the normalized measure `dη/2π`.

pub mod curve;
pub mod kernel;

pub use curve::{chord, radius_from_r, CurveError, FourierCurve, Geometry};
pub use kernel::{kernel_matrix, pair_split, PairSplit, QuadTables};

use crate::bessel::{Bessel, BesselError};
use crate::fourier;
use crate::par::{map_range, Exec};
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ContourError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Bessel(#[from] BesselError),
    #[error("curve grid {got} does not match solver grid {want}")]
    GridMismatch { got: usize, want: usize },
    #[error("lambda must be positive, got {0}")]
    Lambda(f64),
    #[error("energy has imaginary residue {0:e}")]
    ImaginaryResidue(f64),
}

/// Quadrature context for one `(λ, M)` pair.
#[derive(Debug, Clone)]
pub struct Contour {
    pub lambda: f64,
    pub m: usize,
    pub exec: Exec,
    tables: QuadTables,
}

impl Contour {
    pub fn new(lambda: f64, m: usize) -> Result<Self, ContourError> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(ContourError::Lambda(lambda));
        }
        if m < 8 || m % 2 == 1 {
            return Err(CurveError::GridSize(m).into());
        }
        Ok(Contour { lambda, m, exec: Exec::default(), tables: QuadTables::new(lambda, m) })
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn tables(&self) -> &QuadTables {
        &self.tables
    }

    pub fn geometry(&self, r: &FourierCurve) -> Result<Geometry, ContourError> {
        if r.grid_size != self.m {
            return Err(ContourError::GridMismatch { got: r.grid_size, want: self.m });
        }
        r.check_resolution()?;
        Ok(Geometry::new(r)?)
    }

    pub fn kernel(&self, r: &FourierCurve) -> Result<(Geometry, Vec<f64>), ContourError> {
        let g = self.geometry(r)?;
        let k = kernel_matrix(&g, &self.tables, self.exec);
        Ok((g, k))
    }

    /// Grid values of `F_λ[r](θ) = ∫ K_0(λA_r) ∂²_{θη}(R(η)R(θ) sin(η-θ)) dη`, mean removed.
    pub fn f_lambda_grid(&self, r: &FourierCurve) -> Result<Vec<f64>, ContourError> {
        let (g, k) = self.kernel(r)?;
        Ok(f_from_kernel(&g, &k))
    }

    pub fn f_lambda(&self, r: &FourierCurve) -> Result<FourierCurve, ContourError> {
        Ok(FourierCurve::from_grid(&self.f_lambda_grid(r)?))
    }

    /// `V_r(θ) = Ω + R(θ)^{-1} ∫ K_0(λA_r) ∂_η(R(η) sin(η-θ)) dη`.
    pub fn v_r(&self, r: &FourierCurve, omega: f64) -> Result<Vec<f64>, ContourError> {
        let (g, k) = self.kernel(r)?;
        Ok(v_from_kernel(&g, &k, omega))
    }

    /// `θ ↦ ∫ K_0(λA_r(θ,η)) ρ(η) dη` on the grid.
    pub fn l_r_apply(&self, r: &FourierCurve, rho: &[f64]) -> Result<Vec<f64>, ContourError> {
        let (_, k) = self.kernel(r)?;
        Ok(matvec(&k, rho))
    }

    /// `∂_θ(-V_r ρ + L_r ρ)`: derivative of the right-hand side in direction `ρ`.
    pub fn linearized_apply(&self, r: &FourierCurve, omega: f64, rho: &FourierCurve) -> Result<FourierCurve, ContourError> {
        let (g, k) = self.kernel(r)?;
        let v = v_from_kernel(&g, &k, omega);
        let rg = rho.to_grid();
        let lr = matvec(&k, &rg);
        let w: Vec<f64> = rg.iter().zip(&v).zip(&lr).map(|((p, v), l)| -v * p + l).collect();
        Ok(FourierCurve::from_grid(&w).derivative())
    }

    /// `∂_t r = -Ω ∂_θ r - F_λ[r]`.
    pub fn rhs(&self, r: &FourierCurve, omega: f64) -> Result<FourierCurve, ContourError> {
        let f = self.f_lambda(r)?;
        Ok(r.derivative().scale(-omega).axpy(-1.0, &f))
    }

    /// `E(r) = -½ ∬ (z̄(θ) - z̄(η))² g(λ|z(θ) - z(η)|) z'(θ) z'(η)`.
    pub fn energy(&self, r: &FourierCurve) -> Result<f64, ContourError> {
        let g = self.geometry(r)?;
        let m = self.m;
        let lambda = self.lambda;
        let bessel = Bessel::default();
        let z: Vec<Complex64> = (0..m).map(|i| Complex64::from_polar(g.big_r[i], g.theta[i])).collect();
        let dz: Vec<Complex64> = (0..m)
            .map(|i| Complex64::new(g.big_r_prime[i], g.big_r[i]) * Complex64::from_polar(1.0, g.theta[i]))
            .collect();
        let rows: Vec<Result<Complex64, ContourError>> = map_range(self.exec, m, |i| {
            let mut acc = Complex64::new(0.0, 0.0);
            for n in 0..m {
                if n == i {
                    continue;
                }
                let (_, v2m1) = kernel::pair_v2m1(&g, i, n);
                let dzb = (z[i] - z[n]).conj();
                let x = lambda * (z[i] - z[n]).norm();
                let (p, q) = bessel.kernel_g_parts(x)?;
                let base = -0.5 * dzb * dzb * dz[i] * dz[n];
                let log_lv = lambda.ln() + 0.5 * v2m1.ln_1p();
                let d = (i + m - n) % m;
                acc += base * (self.tables.logw[d] * p + (log_lv * p + q) / m as f64);
            }
            Ok(acc)
        });
        let mut total = Complex64::new(0.0, 0.0);
        for row in rows {
            total += row?;
        }
        total /= m as f64;
        let scale = total.re.abs().max(1e-300);
        if total.im.abs() > 1e-10 * scale.max(1.0) {
            return Err(ContourError::ImaginaryResidue(total.im));
        }
        Ok(total.re)
    }

    /// `H = ½(E - ΩJ)`.
    pub fn hamiltonian(&self, r: &FourierCurve, omega: f64) -> Result<f64, ContourError> {
        Ok(0.5 * (self.energy(r)? - omega * angular_impulse(r)))
    }
}

pub(crate) fn matvec(k: &[f64], x: &[f64]) -> Vec<f64> {
    let m = x.len();
    (0..m).map(|i| k[i * m..(i + 1) * m].iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

fn f_from_kernel(g: &Geometry, k: &[f64]) -> Vec<f64> {
    let m = g.m;
    let (big_r, dr, th) = (&g.big_r, &g.big_r_prime, &g.theta);
    let mut out: Vec<f64> = (0..m)
        .map(|i| {
            let mut acc = 0.0;
            for n in 0..m {
                let (sn, cs) = (th[n] - th[i]).sin_cos();
                let f = (dr[i] * dr[n] + big_r[i] * big_r[n]) * sn + (dr[i] * big_r[n] - dr[n] * big_r[i]) * cs;
                acc += k[i * m + n] * f;
            }
            acc
        })
        .collect();
    let mean = fourier::mean(&out);
    out.iter_mut().for_each(|v| *v -= mean);
    out
}

pub(crate) fn v_from_kernel(g: &Geometry, k: &[f64], omega: f64) -> Vec<f64> {
    let m = g.m;
    (0..m)
        .map(|i| {
            let mut acc = 0.0;
            for n in 0..m {
                let (sn, cs) = (g.theta[n] - g.theta[i]).sin_cos();
                acc += k[i * m + n] * (g.big_r_prime[n] * sn + g.big_r[n] * cs);
            }
            omega + acc / g.big_r[i]
        })
        .collect()
}

/// `J(r) = ¼ ∫ (1 + 2r)²`.
pub fn angular_impulse(r: &FourierCurve) -> f64 {
    let g = r.to_grid();
    0.25 * g.iter().map(|x| (1.0 + 2.0 * x).powi(2)).sum::<f64>() / g.len() as f64
}

/// `F_λ[r]` with a fresh quadrature context.
pub fn f_lambda(r: &FourierCurve, lambda: f64) -> Result<FourierCurve, ContourError> {
    Contour::new(lambda, r.grid_size)?.f_lambda(r)
}

pub fn v_r(r: &FourierCurve, lambda: f64, omega: f64) -> Result<Vec<f64>, ContourError> {
    Contour::new(lambda, r.grid_size)?.v_r(r, omega)
}

pub fn energy(r: &FourierCurve, lambda: f64) -> Result<f64, ContourError> {
    Contour::new(lambda, r.grid_size)?.energy(r)
}
