//! Time stepping of the boundary equation in the rotating frame and the
//! conservation diagnostics that go with it.

use crate::bessel::product_ik;
use crate::contour::{angular_impulse, Contour, ContourError, FourierCurve};
use crate::fourier;
use crate::spectrum::{omega_j, SpectrumContext};
use num_complex::Complex64;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Contour(#[from] ContourError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("step size {dt} violates the transport guard (limit {limit})")]
    Cfl { dt: f64, limit: f64 },
    #[error("non-finite state at t = {0}")]
    NotFinite(f64),
    #[error("smallness guard breached at t = {t} (max |r| = {max})")]
    BlowUp { t: f64, max: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub record_every: usize,
}

impl EvolutionConfig {
    pub fn new(dt: f64, t_end: f64) -> Self {
        EvolutionConfig { dt, t_end, scheme: Scheme::Rk4, record_every: 1 }
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(DynamicsError::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(DynamicsError::Config(format!("t_end must be positive, got {}", self.t_end)));
        }
        if self.dt > self.t_end {
            return Err(DynamicsError::Config("dt exceeds t_end".into()));
        }
        if self.record_every == 0 {
            return Err(DynamicsError::Config("record_every must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of steps; the step is shrunk so that they land exactly on `t_end`.
    pub fn steps(&self) -> (usize, f64) {
        let n = (self.t_end / self.dt - 1e-9).ceil().max(1.0) as usize;
        (n, self.t_end / n as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ConservationReport {
    pub drift_e: f64,
    pub drift_j: f64,
    pub drift_mean: f64,
    pub reversibility_defect: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostics {
    pub t: f64,
    pub energy: f64,
    pub impulse: f64,
    pub mean: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<(f64, FourierCurve)>,
    pub diagnostics: Vec<Diagnostics>,
    pub report: ConservationReport,
}

impl Trajectory {
    pub fn last(&self) -> &FourierCurve {
        &self.snapshots.last().expect("trajectory has the initial state").1
    }
}

/// `∂_t r = -Ω∂_θ r - F_λ[r]`.
pub fn rhs(c: &Contour, r: &FourierCurve, omega: f64) -> Result<FourierCurve, DynamicsError> {
    Ok(c.rhs(r, omega)?)
}

/// Largest step allowed by `dt·max|V_r| ≤ π/M`.
pub fn cfl_limit(c: &Contour, r: &FourierCurve, omega: f64) -> Result<f64, DynamicsError> {
    let v = c.v_r(r, omega)?;
    let vmax = v.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    Ok(if vmax == 0.0 { f64::INFINITY } else { std::f64::consts::PI / (c.m as f64 * vmax) })
}

fn rk4_step(c: &Contour, r: &FourierCurve, omega: f64, h: f64) -> Result<FourierCurve, DynamicsError> {
    let k1 = rhs(c, r, omega)?;
    let k2 = rhs(c, &r.axpy(0.5 * h, &k1), omega)?;
    let k3 = rhs(c, &r.axpy(0.5 * h, &k2), omega)?;
    let k4 = rhs(c, &r.axpy(h, &k3), omega)?;
    let mut out = r.clone();
    for (i, o) in out.coeffs.iter_mut().enumerate() {
        *o += (k1.coeffs[i] + 2.0 * k2.coeffs[i] + 2.0 * k3.coeffs[i] + k4.coeffs[i]) * (h / 6.0);
    }
    Ok(out)
}

fn diagnostics(c: &Contour, r: &FourierCurve, t: f64) -> Result<Diagnostics, DynamicsError> {
    Ok(Diagnostics { t, energy: c.energy(r)?, impulse: angular_impulse(r), mean: fourier::mean(&r.to_grid()) })
}

/// Integrate without recording anything but the final state.
pub fn integrate(c: &Contour, r0: &FourierCurve, omega: f64, cfg: &EvolutionConfig) -> Result<FourierCurve, DynamicsError> {
    Ok(run(c, r0, omega, cfg, false)?.last().clone())
}

/// Fixed-step RK4 on the Fourier coefficients, with conservation monitoring.
pub fn evolve(c: &Contour, r0: &FourierCurve, omega: f64, cfg: &EvolutionConfig) -> Result<Trajectory, DynamicsError> {
    run(c, r0, omega, cfg, true)
}

fn run(c: &Contour, r0: &FourierCurve, omega: f64, cfg: &EvolutionConfig, monitor: bool) -> Result<Trajectory, DynamicsError> {
    cfg.validate()?;
    r0.check_guard().map_err(ContourError::from)?;
    let limit = cfl_limit(c, r0, omega)?;
    if cfg.dt > limit {
        return Err(DynamicsError::Cfl { dt: cfg.dt, limit });
    }
    let (n, h) = cfg.steps();
    let mut r = r0.clone();
    let mut snapshots = vec![(0.0, r.clone())];
    let mut diags = Vec::new();
    if monitor {
        diags.push(diagnostics(c, &r, 0.0)?);
    }
    for step in 1..=n {
        let t = step as f64 * h;
        r = rk4_step(c, &r, omega, h)?;
        if r.coeffs.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(DynamicsError::NotFinite(t));
        }
        let max = r.max_abs();
        if max >= 0.5 {
            return Err(DynamicsError::BlowUp { t, max });
        }
        if step % cfg.record_every == 0 || step == n {
            if monitor {
                diags.push(diagnostics(c, &r, t)?);
                snapshots.push((t, r.clone()));
            } else if step == n {
                snapshots.push((t, r.clone()));
            }
        }
    }
    let report = if monitor { drift_report(&diags) } else { ConservationReport::default() };
    Ok(Trajectory { snapshots, diagnostics: diags, report })
}

fn drift_report(d: &[Diagnostics]) -> ConservationReport {
    let (e0, j0) = (d[0].energy, d[0].impulse);
    let rel = |x: f64, x0: f64| if x0 == 0.0 { x.abs() } else { (x - x0).abs() / x0.abs() };
    let mut rep = ConservationReport::default();
    for x in d {
        rep.drift_e = rep.drift_e.max(rel(x.energy, e0));
        rep.drift_j = rep.drift_j.max(rel(x.impulse, j0));
        rep.drift_mean = rep.drift_mean.max(x.mean.abs());
    }
    rep
}

/// `ρ(t,θ) = Σ ρ_j cos(jθ - Ω_j t)` on an `m`-point grid.
pub fn linear_flow(lambda: f64, omega: f64, amplitudes: &[(usize, f64)], t: f64, m: usize) -> Result<FourierCurve, DynamicsError> {
    let ctx = SpectrumContext::new(lambda, omega, amplitudes.iter().map(|&(j, _)| j as u32).collect())
        .map_err(|e| DynamicsError::Config(e.to_string()))?;
    let modes: Vec<(usize, Complex64)> = amplitudes
        .iter()
        .map(|&(j, a)| (j, Complex64::from_polar(0.5 * a, -omega_j(&ctx, j as i64) * t)))
        .collect();
    Ok(FourierCurve::from_modes(m, &modes).map_err(ContourError::from)?)
}

/// Residual of `∂_tρ + V_0∂_θρ - ∂_θ(K_λ∗ρ)` for a linear flow, with `∂_t` taken analytically.
pub fn linear_flow_residual(lambda: f64, omega: f64, amplitudes: &[(usize, f64)], t: f64, m: usize) -> Result<f64, DynamicsError> {
    let ctx = SpectrumContext::new(lambda, omega, amplitudes.iter().map(|&(j, _)| j as u32).collect())
        .map_err(|e| DynamicsError::Config(e.to_string()))?;
    let v0 = omega + product_ik(1, lambda);
    let rho = linear_flow(lambda, omega, amplitudes, t, m)?;
    let mut res = FourierCurve::zero(m);
    for &(j, _) in amplitudes {
        let c = rho.coeffs[j - 1];
        let w = omega_j(&ctx, j as i64);
        let jj = j as f64;
        let dt = c * Complex64::new(0.0, -w);
        let transport = c * Complex64::new(0.0, v0 * jj);
        let nonlocal = c * Complex64::new(0.0, jj * product_ik(j as u32, lambda));
        res.coeffs[j - 1] += dt + transport - nonlocal;
    }
    Ok(res.max_abs())
}

/// Evolve an even `r0` forward to `t_end`, reflect, evolve again and compare with `r0`.
pub fn reversibility_check(c: &Contour, r0_even: &FourierCurve, omega: f64, cfg: &EvolutionConfig) -> Result<f64, DynamicsError> {
    let odd = r0_even.coeffs.iter().fold(0.0_f64, |a, z| a.max(z.im.abs()));
    if odd > 1e-14 * r0_even.coeffs.iter().fold(1.0_f64, |a, z| a.max(z.norm())) {
        return Err(DynamicsError::Config("initial curve is not even".into()));
    }
    let forward = integrate(c, r0_even, omega, cfg)?;
    let back = integrate(c, &forward.reflected(), omega, cfg)?;
    Ok(back.axpy(-1.0, r0_even).max_abs())
}
