//! Diagonalization of `ω·∂_φ + 𝒟 + ℛ` on the normal modes.

use super::{check_divergence, chi, offdiag_norm, s0, schedule, DiagonalSpectrum, KamError, TorusFunction, ToeplitzOperator};
use crate::cantor::DiophantineParams;
use crate::spectrum::bracket;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::time::Instant;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn dot(omega: &[f64], l: &[i64]) -> f64 {
    omega.iter().zip(l).map(|(w, &k)| w * k as f64).sum()
}

/// `(Ψ, clipped entries)` with `[ω·∂_φ + 𝒟, Ψ] + P_N ℛ = ⌊P_N ℛ⌋` wherever the cut-off is 1.
pub fn solve_remainder_homological(
    mu: &DiagonalSpectrum,
    r: &ToeplitzOperator,
    omega: &[f64],
    n: usize,
    dio: &DiophantineParams,
) -> (ToeplitzOperator, Vec<(Vec<i64>, i64, i64)>) {
    let mut clipped = Vec::new();
    let pr = r.project(n);
    let psi = pr.map_entries(|l, j, j0, v| {
        if (j == j0 && l.iter().all(|&x| x == 0)) || v == Complex64::new(0.0, 0.0) {
            return Complex64::new(0.0, 0.0);
        }
        let div = dot(omega, l) + mu.get(j) - mu.get(j0);
        let w = chi(div * bracket(l).powf(dio.tau2) / (dio.gamma * (j - j0).unsigned_abs().max(1) as f64));
        if w < 1.0 {
            clipped.push((l.to_vec(), j, j0));
        }
        if w == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            I * v * (w / div)
        }
    });
    (psi, clipped)
}

/// `Σ_n (−Ψ)^n X`.
fn neumann(psi: &ToeplitzOperator, x: &ToeplitzOperator) -> Result<ToeplitzOperator, KamError> {
    let mut sum = x.clone();
    let mut term = x.clone();
    for _ in 0..200 {
        term = psi.compose(&term).scale(-1.0);
        sum = sum.axpy(1.0, &term);
        let t = term.max_abs();
        if t <= 1e-17 * sum.max_abs().max(1e-300) || t == 0.0 {
            return Ok(sum);
        }
    }
    Err(KamError::Neumann(psi.max_abs()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemainderStep {
    pub m: usize,
    #[serde(rename = "N_m")]
    pub n_m: usize,
    pub offdiag_s0: f64,
    pub psi_s0: f64,
    pub clipped_entries: usize,
    pub reversibility_defect: f64,
    pub wallclock: f64,
}

/// One step: `μ_j += r_j`, `ℛ₊ = Φ⁻¹(−Ψ⌊P_Nℛ⌋ + P⊥_Nℛ + ℛΨ)` with `Φ = Id + Ψ`.
pub fn remainder_kam_step(
    mu: &DiagonalSpectrum,
    r: &ToeplitzOperator,
    omega: &[f64],
    n: usize,
    dio: &DiophantineParams,
) -> Result<(DiagonalSpectrum, ToeplitzOperator, RemainderStep), KamError> {
    let t = Instant::now();
    let (psi, clipped) = solve_remainder_homological(mu, r, omega, n, dio);
    let psi_s0 = offdiag_norm(&psi, s0(r.d));
    if psi_s0 >= 0.5 {
        return Err(KamError::Neumann(psi_s0));
    }
    let diag = r.project(n).diagonal_operator();
    let mut next_mu = mu.clone();
    for (j, v) in diag.diagonal() {
        *next_mu.mu.get_mut(&j).expect("mode") += v.im;
    }
    let x = psi.compose(&diag).scale(-1.0).axpy(1.0, &r.project_perp(n)).axpy(1.0, &r.compose(&psi));
    let next = neumann(&psi, &x)?;
    let defect = next.symmetry_defect(-1.0);
    if defect > 1e-12 {
        return Err(KamError::Reversibility(defect));
    }
    let next = next.symmetrized(-1.0);
    let info = RemainderStep {
        m: 0,
        n_m: n,
        offdiag_s0: offdiag_norm(&next, s0(r.d)),
        psi_s0,
        clipped_entries: clipped.len(),
        reversibility_defect: defect,
        wallclock: t.elapsed().as_secs_f64(),
    };
    Ok((next_mu, next, info))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemainderReport {
    pub mu0: DiagonalSpectrum,
    pub mu_inf: DiagonalSpectrum,
    pub initial_offdiag_s0: f64,
    pub steps: Vec<RemainderStep>,
}

impl RemainderReport {
    /// `r_j^∞ = μ_j^∞ − μ_j^0`.
    pub fn r_inf(&self) -> Vec<(i64, f64)> {
        self.mu_inf.mu.iter().map(|(&j, v)| (j, v - self.mu0.get(j))).collect()
    }
}

pub fn remainder_kam_run(
    mu0: &DiagonalSpectrum,
    r0: &ToeplitzOperator,
    omega: &[f64],
    dio: &DiophantineParams,
    n_steps: usize,
) -> Result<RemainderReport, KamError> {
    dio.validate(r0.d)?;
    if mu0.modes() != {
        let mut m = r0.modes.clone();
        m.sort();
        m
    } {
        return Err(KamError::Config("spectrum and operator live on different modes".into()));
    }
    let jspan = 2 * r0.modes.iter().map(|j| j.unsigned_abs()).max().unwrap_or(0) as usize;
    let cap = r0.lcap.max(jspan);
    let mut mu = mu0.clone();
    let mut r = r0.clone();
    let initial = offdiag_norm(r0, s0(r0.d));
    let mut monitored = vec![initial];
    let mut steps = Vec::new();
    for m in 0..n_steps {
        let (nm, nr, mut info) = remainder_kam_step(&mu, &r, omega, schedule(dio.n0, m, cap), dio)?;
        info.m = m;
        monitored.push(info.offdiag_s0);
        steps.push(info);
        check_divergence(&monitored)?;
        mu = nm;
        r = nr;
    }
    Ok(RemainderReport { mu0: mu0.clone(), mu_inf: mu, initial_offdiag_s0: initial, steps })
}

/// Solve `(ω·∂_φ + 𝒟)u = Π_N h` on the normal modes with the cut-off on the
/// first Melnikov divisors. Returns `u` and the clipped modes.
pub fn invert_diagonal(
    mu: &DiagonalSpectrum,
    omega: &[f64],
    rhs: &TorusFunction,
    n: usize,
    dio: &DiophantineParams,
) -> (TorusFunction, Vec<(Vec<i64>, i64)>) {
    let mut clipped = Vec::new();
    let out = rhs.map_modes(|l, j, v| {
        if !mu.mu.contains_key(&j) || super::bracket_lj(l, j) > n as f64 || v == Complex64::new(0.0, 0.0) {
            return Complex64::new(0.0, 0.0);
        }
        let div = dot(omega, l) + mu.get(j);
        let w = chi(div * bracket(l).powf(dio.tau1) / (dio.gamma * j.unsigned_abs() as f64));
        if w < 1.0 {
            clipped.push((l.to_vec(), j));
        }
        if w == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            v * (w / div) / I
        }
    });
    (out, clipped)
}
