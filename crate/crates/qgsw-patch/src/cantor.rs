//! Melnikov membership tests and sublevel-set measures in the parameter `λ`.

use crate::kam::DiagonalSpectrum;
use crate::par::{map_range, Exec};
use crate::spectrum::{bracket, frequency_vector, lattice_ball, SpectrumContext, SpectrumError};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CantorError {
    #[error("invalid Diophantine parameters: {0}")]
    Params(String),
    #[error("invalid measure setup: {0}")]
    Setup(String),
    #[error("derivative lower bound {beta} not attained (max {seen})")]
    Hypothesis { beta: f64, seen: f64 },
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiophantineParams {
    pub gamma: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub upsilon: f64,
    pub q0: u32,
    pub n0: u32,
}

impl Default for DiophantineParams {
    fn default() -> Self {
        DiophantineParams { gamma: 1e-4, tau1: 3.0, tau2: 4.0, upsilon: 0.25, q0: 2, n0: 4 }
    }
}

impl DiophantineParams {
    /// Check the ranges and `τ₂ > τ₁ > d`, `υ ≤ 1/(q₀+2)`.
    pub fn validate(&self, d: usize) -> Result<(), CantorError> {
        let bad = |m: String| Err(CantorError::Params(m));
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad(format!("gamma = {} not in (0,1)", self.gamma));
        }
        if !(self.tau1 > d as f64 && self.tau2 > self.tau1) {
            return bad(format!("need tau2 > tau1 > d, got {} {} {}", self.tau2, self.tau1, d));
        }
        if !(self.upsilon > 0.0 && self.upsilon <= 1.0 / (self.q0 as f64 + 2.0)) {
            return bad(format!("upsilon = {} not in (0, 1/(q0+2)]", self.upsilon));
        }
        if self.n0 < 4 {
            return bad(format!("N0 = {} below 4", self.n0));
        }
        Ok(())
    }
}

fn jbracket(j: i64) -> f64 {
    j.unsigned_abs().max(1) as f64
}

fn dot(omega: &[f64], l: &[i64]) -> f64 {
    omega.iter().zip(l).map(|(w, &k)| w * k as f64).sum()
}

/// `|ω·l + jc| > 4γ^υ⟨j⟩/⟨l⟩^{τ₁}`.
pub fn first_melnikov_ok(omega: &[f64], c: f64, l: &[i64], j: i64, dio: &DiophantineParams) -> bool {
    let lhs = (dot(omega, l) + j as f64 * c).abs();
    lhs > 4.0 * dio.gamma.powf(dio.upsilon) * jbracket(j) / bracket(l).powf(dio.tau1)
}

/// `|ω·l + μ_j − μ_{j₀}| > 2γ⟨j−j₀⟩/⟨l⟩^{τ₂}`.
pub fn second_melnikov_ok(omega: &[f64], mu: &DiagonalSpectrum, l: &[i64], j: i64, j0: i64, dio: &DiophantineParams) -> bool {
    let lhs = (dot(omega, l) + mu.get(j) - mu.get(j0)).abs();
    lhs > 2.0 * dio.gamma * jbracket(j - j0) / bracket(l).powf(dio.tau2)
}

/// Closed intervals `{x : |g(x)| ≤ thr}` inside `[grid[0], grid[n-1]]`.
///
/// `samples[k] = g(grid[k])`. Runs of marked grid points are widened to the
/// crossings by bisection; sign changes between two unmarked neighbours are
/// resolved as a root with its own sub-grid interval. Dips of `|g|` below `thr`
/// without a sign change between unmarked points are not seen.
pub fn sublevel_intervals(g: &dyn Fn(f64) -> f64, grid: &[f64], samples: &[f64], thr: f64, tol: f64) -> Vec<(f64, f64)> {
    let n = grid.len();
    let inside = |v: f64| v.abs() <= thr;
    let crossing = |mut a: f64, mut b: f64| {
        // `a` outside, `b` inside.
        while (b - a).abs() > tol {
            let m = 0.5 * (a + b);
            if inside(g(m)) {
                b = m;
            } else {
                a = m;
            }
        }
        0.5 * (a + b)
    };
    let mut out = Vec::new();
    let mut k = 0;
    while k < n {
        if inside(samples[k]) {
            let start = k;
            while k + 1 < n && inside(samples[k + 1]) {
                k += 1;
            }
            let lo = if start == 0 { grid[0] } else { crossing(grid[start - 1], grid[start]) };
            let hi = if k == n - 1 { grid[n - 1] } else { crossing(grid[k + 1], grid[k]) };
            out.push((lo, hi));
        } else if k + 1 < n && !inside(samples[k + 1]) && samples[k].signum() != samples[k + 1].signum() {
            let (mut a, mut b) = (grid[k], grid[k + 1]);
            let sa = samples[k].signum();
            while (b - a).abs() > tol {
                let m = 0.5 * (a + b);
                let v = g(m);
                if inside(v) {
                    a = m;
                    b = m;
                    break;
                }
                if v.signum() == sa {
                    a = m;
                } else {
                    b = m;
                }
            }
            let root = 0.5 * (a + b);
            out.push((crossing(grid[k], root), crossing(grid[k + 1], root)));
        }
        k += 1;
    }
    out
}

fn union_length(mut iv: Vec<(f64, f64)>) -> (f64, Vec<(f64, f64)>) {
    iv.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (a, b) in iv {
        match merged.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => merged.push((a, b)),
        }
    }
    (merged.iter().fold(0.0, |acc, (a, b)| acc + (b - a)), merged)
}

/// Least-squares slope of `log y` against `log x` over positive `y`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).filter(|(_, &v)| v > 0.0).map(|(a, b)| (a.ln(), b.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureSetup {
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub omega: f64,
    pub sites: Vec<u32>,
    pub tau1: f64,
    pub lmax: u32,
    pub grid: usize,
    pub gammas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub gamma_values: Vec<f64>,
    pub complement_measure: Vec<f64>,
    /// `Σ_l |ℛ_l|` per γ, an upper bound for the union.
    pub summed_measure: Vec<f64>,
    pub fitted_exponent: Option<f64>,
    pub grid_resolution: usize,
    pub intervals: Vec<Vec<(f64, f64)>>,
}

/// Measure of `∪_{0<|l|₁≤lmax} {λ : |ω(λ)·l| ≤ γ/⟨l⟩^{τ₁}}` for each γ.
pub fn resonant_complement_measure(setup: &MeasureSetup, exec: Exec) -> Result<MeasureReport, CantorError> {
    if setup.grid < 10_000 {
        return Err(CantorError::Setup(format!("grid {} below 1e4 points", setup.grid)));
    }
    if setup.lmax < 5 {
        return Err(CantorError::Setup(format!("lmax {} below 5", setup.lmax)));
    }
    if !(setup.lambda_hi > setup.lambda_lo) {
        return Err(CantorError::Setup("empty lambda interval".into()));
    }
    let base = SpectrumContext::new(setup.lambda_lo, setup.omega, setup.sites.clone())?;
    SpectrumContext::new(setup.lambda_hi, setup.omega, setup.sites.clone())?;
    let d = setup.sites.len();
    let n = setup.grid;
    let h = (setup.lambda_hi - setup.lambda_lo) / (n - 1) as f64;
    let grid: Vec<f64> = (0..n).map(|k| setup.lambda_lo + k as f64 * h).collect();
    let freqs: Vec<Vec<f64>> = map_range(exec, n, |k| frequency_vector(&base.with_lambda(grid[k])));
    let ls: Vec<Vec<i64>> = lattice_ball(d, setup.lmax)
        .into_iter()
        .filter(|l| l.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0))
        .collect();
    let tol = 1e-10;

    let mut measures = Vec::new();
    let mut sums = Vec::new();
    let mut all = Vec::new();
    for &gamma in &setup.gammas {
        let per_l: Vec<Vec<(f64, f64)>> = map_range(exec, ls.len(), |i| {
            let l = &ls[i];
            let thr = gamma / bracket(l).powf(setup.tau1);
            let samples: Vec<f64> = freqs.iter().map(|w| dot(w, l)).collect();
            let g = |lam: f64| dot(&frequency_vector(&base.with_lambda(lam)), l);
            sublevel_intervals(&g, &grid, &samples, thr, tol)
        });
        let flat: Vec<(f64, f64)> = per_l.into_iter().flatten().collect();
        sums.push(flat.iter().fold(0.0, |acc, (a, b)| acc + (b - a)));
        let (len, merged) = union_length(flat);
        measures.push(len);
        all.push(merged);
    }
    Ok(MeasureReport {
        fitted_exponent: loglog_slope(&setup.gammas, &measures),
        gamma_values: setup.gammas.clone(),
        complement_measure: measures,
        summed_measure: sums,
        grid_resolution: n,
        intervals: all,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RussmannReport {
    pub alphas: Vec<f64>,
    pub measures: Vec<f64>,
    /// `max_α |{|f| ≤ α}|·β^{1+1/q₀}/α^{1/q₀}`.
    pub constant: f64,
    /// Spread `max/min` of `measure/α^{1/q₀}` across the α list.
    pub spread: f64,
}

/// Sublevel measures of `f` on `[lo, hi]` against the `α^{1/q₀}` law.
///
/// `derivatives` holds `f, f', …, f^{(q₀)}`; the largest of their moduli must
/// reach `beta` at every grid point.
pub fn russmann_check(
    derivatives: &[&dyn Fn(f64) -> f64],
    interval: (f64, f64),
    grid: usize,
    alphas: &[f64],
    beta: f64,
) -> Result<RussmannReport, CantorError> {
    if derivatives.len() < 2 || grid < 2 {
        return Err(CantorError::Setup("need f, at least one derivative and two grid points".into()));
    }
    let q0 = (derivatives.len() - 1) as f64;
    let (lo, hi) = interval;
    let h = (hi - lo) / (grid - 1) as f64;
    let xs: Vec<f64> = (0..grid).map(|k| lo + k as f64 * h).collect();
    let seen = xs
        .iter()
        .map(|&x| derivatives.iter().map(|f| f(x).abs()).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min);
    if seen < beta {
        return Err(CantorError::Hypothesis { beta, seen });
    }
    let f = derivatives[0];
    let samples: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let measures: Vec<f64> = alphas
        .iter()
        .map(|&a| union_length(sublevel_intervals(f, &xs, &samples, a, 1e-15 * (hi - lo).max(1.0))).0)
        .collect();
    let ratios: Vec<f64> = measures.iter().zip(alphas).map(|(m, a)| m / a.powf(1.0 / q0)).collect();
    let rmax = ratios.iter().cloned().fold(0.0, f64::max);
    let rmin = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(RussmannReport {
        alphas: alphas.to_vec(),
        measures,
        constant: rmax * beta.powf(1.0 + 1.0 / q0),
        spread: rmax / rmin,
    })
}
