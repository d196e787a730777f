//! Quadrature of the logarithmic kernel `K_0(λ A_r(θ, η))`.
//!
//! With `s = sin((η-θ)/2)` and `A_r = 2|s| v`,
//! `K_0(λA_r) = K_0(2λ|s|) + s² log|s| 𝒦¹ + 𝒦²` where
//! `𝒦¹ = Σ_{m≥1} λ^{2m} s^{2m-2} (1 - v^{2m})/(m!)²` and
//! `𝒦² = s²(log λ 𝒦¹ - Σ ψ(m+1) λ^{2m} s^{2m-2}(1 - v^{2m})/(m!)²) - log(v) I_0(λA_r)`.
//! The first term is applied through its Fourier multipliers `I_kK_k`, the
//! `log|s|` factor through product weights, and `𝒦²` by the trapezoid rule.

use super::curve::Geometry;
use crate::bessel::{product_ik, EULER_GAMMA};
use crate::par::{for_each_chunk, Exec};
use std::f64::consts::{LN_2, PI};

/// Circulant weights that depend only on `(λ, M)`.
#[derive(Debug, Clone)]
pub struct QuadTables {
    pub lambda: f64,
    pub m: usize,
    /// `C_d`: discrete convolution with `K_0(2λ|sin(·/2)|)`.
    pub circ: Vec<f64>,
    /// `w_d`: discrete convolution with `log|sin(·/2)|`.
    pub logw: Vec<f64>,
}

impl QuadTables {
    pub fn new(lambda: f64, m: usize) -> Self {
        assert!(m >= 8 && m % 2 == 0, "grid size must be even");
        let half = m / 2;
        let ik: Vec<f64> = (0..=half).map(|k| product_ik(k as u32, lambda)).collect();
        let mut circ = vec![0.0; m];
        let mut logw = vec![0.0; m];
        for d in 0..=half {
            let x = 2.0 * PI * d as f64 / m as f64;
            let nyq = if d % 2 == 0 { 1.0 } else { -1.0 };
            let mut c = ik[0] + ik[half] * nyq;
            let mut w = -LN_2 - nyq / m as f64;
            for k in 1..half {
                let ck = (k as f64 * x).cos();
                c += 2.0 * ik[k] * ck;
                w -= ck / k as f64;
            }
            circ[d] = c / m as f64;
            logw[d] = w / m as f64;
            if d > 0 && d < half {
                circ[m - d] = circ[d];
                logw[m - d] = logw[d];
            }
        }
        QuadTables { lambda, m, circ, logw }
    }
}

/// Pieces of the kernel split at one node pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSplit {
    pub s: f64,
    /// `K_0(2λ|s|)`; infinite on the diagonal.
    pub log_part: f64,
    /// `s² log|s|`
    pub script_k: f64,
    pub smooth1: f64,
    pub smooth2: f64,
    /// `A_r`
    pub chord: f64,
}

/// `(s, 𝒦¹, 𝒦², A)` at `(θ_i, θ_m)`, with the diagonal limits when `i = m`.
pub fn pair_smooth(g: &Geometry, lambda: f64, i: usize, m: usize) -> (f64, f64, f64, f64) {
    if i == m {
        let v2 = g.big_r_prime[i].powi(2) + g.big_r[i] * g.big_r[i];
        return (0.0, lambda * lambda * (1.0 - v2), -0.5 * v2.ln(), 0.0);
    }
    let (s, v2m1) = pair_v2m1(g, i, m);
    let (k1, k2, chord) = smooth_parts(lambda, s, v2m1);
    (s, k1, k2, chord)
}

/// `(s, v² - 1)` for `i ≠ m`, where `A_r = 2|s|v`.
pub fn pair_v2m1(g: &Geometry, i: usize, m: usize) -> (f64, f64) {
    let (ri, rm) = (g.big_r[i], g.big_r[m]);
    let s = (0.5 * (g.theta[m] - g.theta[i])).sin();
    // R_i R_m - 1 without cancellation: (R_iR_m)² = (1+2r_i)(1+2r_m).
    let prod_m1 = (0.5 * (2.0 * g.r[i] + 2.0 * g.r[m] + 4.0 * g.r[i] * g.r[m]).ln_1p()).exp_m1();
    let q = (rm - ri) / (2.0 * s);
    (s, q * q + prod_m1)
}

/// Kernel split at `(θ_i, θ_m)`.
pub fn pair_split(g: &Geometry, lambda: f64, i: usize, m: usize) -> PairSplit {
    let (s, smooth1, smooth2, chord) = pair_smooth(g, lambda, i, m);
    let (log_part, script_k) = if i == m {
        (f64::INFINITY, 0.0)
    } else {
        (crate::bessel::bessel_k(0, 2.0 * lambda * s.abs()).unwrap_or(f64::INFINITY), s * s * s.abs().ln())
    };
    PairSplit { s, log_part, script_k, smooth1, smooth2, chord }
}

/// `(𝒦¹, 𝒦², A)` from `s` and `v² - 1`.
pub fn smooth_parts(lambda: f64, s: f64, v2m1: f64) -> (f64, f64, f64) {
    let log_v2 = v2m1.ln_1p();
    let v2 = 1.0 + v2m1;
    let l2 = lambda * lambda;
    let y = l2 * s * s;
    // t_m = λ^{2m} s^{2m-2}/(m!)²
    let mut t = l2;
    let mut k1 = 0.0;
    let mut kpsi = 0.0;
    let mut psi = 1.0 - EULER_GAMMA; // ψ(2)
    // I_0(λA) = Σ (y v²)^m/(m!)²
    let mut i0 = 1.0;
    let mut u = 1.0;
    for m in 1..200 {
        let mf = m as f64;
        let a = -(mf * log_v2).exp_m1();
        k1 += t * a;
        kpsi += psi * t * a;
        u *= y * v2 / (mf * mf);
        i0 += u;
        let next = t * y / ((mf + 1.0) * (mf + 1.0));
        if t * (1.0 + v2.powi(m)) < 1e-18 * (k1.abs() + l2) && u < 1e-18 * i0 {
            break;
        }
        t = next;
        psi += 1.0 / (mf + 1.0);
    }
    let k2 = s * s * (lambda.ln() * k1 - kpsi) - 0.5 * log_v2 * i0;
    (k1, k2, 2.0 * s.abs() * v2.sqrt())
}

/// Symmetric quadrature matrix: `Σ_m K[i][m] φ_m ≈ ∫ K_0(λA_r(θ_i, η)) φ(η) dη`
/// for smooth `φ`, normalized measure. Row-major `M × M`.
pub fn kernel_matrix(g: &Geometry, t: &QuadTables, exec: Exec) -> Vec<f64> {
    let m = g.m;
    assert_eq!(m, t.m, "tables built for another grid");
    let mut out = vec![0.0; m * m];
    for_each_chunk(exec, &mut out, m, |i, row| {
        for (k, slot) in row.iter_mut().enumerate() {
            let d = (i + m - k) % m;
            let (s, k1, k2, _) = pair_smooth(g, t.lambda, i, k);
            *slot = t.circ[d] + t.logw[d] * s * s * k1 + k2 / m as f64;
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use super::super::curve::FourierCurve;
    use super::*;
    use crate::bessel::bessel_k;

    #[test]
    fn split_reconstructs_kernel() {
        let c = FourierCurve::cosines(64, &[(1, 0.03), (3, 0.02), (5, -0.01)]).unwrap();
        let g = Geometry::new(&c).unwrap();
        let lambda = 1.3;
        let mut worst: f64 = 0.0;
        for i in 0..64 {
            for m in 0..64 {
                if i == m {
                    continue;
                }
                let p = pair_split(&g, lambda, i, m);
                let direct = bessel_k(0, lambda * p.chord).unwrap();
                let rebuilt = p.log_part + p.script_k * p.smooth1 + p.smooth2;
                worst = worst.max((direct - rebuilt).abs());
            }
        }
        assert!(worst < 1e-10, "{worst:e}");
    }

    #[test]
    fn equilibrium_multipliers() {
        // At r = 0 the matrix is the circulant; e^{ijθ} is an eigenvector with eigenvalue I_jK_j.
        let m = 32;
        let g = Geometry::new(&FourierCurve::zero(m)).unwrap();
        let t = QuadTables::new(1.0, m);
        let k = kernel_matrix(&g, &t, Exec::Sequential);
        for j in [1usize, 4, 9] {
            for i in 0..m {
                let mut acc = 0.0;
                for n in 0..m {
                    acc += k[i * m + n] * (j as f64 * g.theta[n]).cos();
                }
                let expect = product_ik(j as u32, 1.0) * (j as f64 * g.theta[i]).cos();
                assert!((acc - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn log_weights_integrate_log_sine() {
        // ∫ log|sin((η-θ)/2)| (1 + cos η) dη/2π = -log 2 - cos θ / 2
        let m = 32;
        let t = QuadTables::new(1.0, m);
        let th = crate::fourier::grid(m);
        for i in 0..m {
            let acc: f64 = (0..m).map(|n| t.logw[(i + m - n) % m] * (1.0 + th[n].cos())).sum();
            assert!((acc - (-LN_2 - 0.5 * th[i].cos())).abs() < 1e-13);
        }
    }
}
