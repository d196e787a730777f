//! Independent representations of `I_j`, `K_j` and `I_j K_j` used as oracles.
//!
//! * [`series_product_dd`]: power series of `I_j` and `K_j` summed in
//!   double-double, so the cancellation in `K_j` at moderate `z` costs nothing visible.
//! * [`nicholson_product`]: `(2(-1)^j/π) ∫_0^{π/2} K_0(2z cos τ) cos(2jτ) dτ`.
//! * [`laplace_product`]: `∫_0^∞ J_0(2λ sinh t) e^{-2jt} dt` (and its λ-derivatives)
//!   after `u = 2λ sinh t`, split at the zeros of the oscillation and
//!   extrapolated with Wynn's epsilon.

use super::dd::{Dd, EULER};
use super::quad::{adaptive, tanh_sinh, wynn_epsilon};
use super::{bessel_j0_deriv, bessel_k};
use std::f64::consts::PI;

fn psi_dd(n: u32) -> Dd {
    let mut h = Dd::ZERO;
    for k in 1..n {
        h = h + Dd::ONE.div_f64(k as f64);
    }
    h - EULER
}

/// `I_j(z)` in double-double.
pub fn bessel_i_dd(j: u32, z: f64) -> Dd {
    let half = Dd::from_f64(z).ldexp(-1);
    let y = half * half;
    let mut t = Dd::ONE;
    for k in 1..=j {
        t = (t * half).div_f64(k as f64);
    }
    let mut s = t;
    for m in 1..2000u32 {
        t = (t * y).div_f64(m as f64 * (m + j) as f64);
        s = s + t;
        if t.hi < 1e-34 * s.hi {
            break;
        }
    }
    s
}

/// `K_j(z)` from its power series in double-double.
pub fn bessel_k_dd(j: u32, z: f64) -> Dd {
    let half = Dd::from_f64(z).ldexp(-1);
    let y = half * half;
    let log_half = if z == 2.0 { Dd::ZERO } else { half.ln() };
    // Finite part: ½ (z/2)^{-j} Σ_{k<j} (j-k-1)!/k! (-y)^k
    let mut fin = Dd::ZERO;
    if j > 0 {
        let mut fact = Dd::ONE; // (j-1)!
        for k in 1..j {
            fact = fact.mul_f64(k as f64);
        }
        let mut t = fact; // (j-k-1)!/k! (-y)^k at k = 0
        for k in 0..j {
            fin = fin + t;
            if k + 1 < j {
                t = (t * (-y)).div_f64(((k + 1) * (j - k - 1)) as f64);
            }
        }
        fin = fin * half.powi(j).recip().ldexp(-1);
    }
    let sign_j = if j % 2 == 0 { 1.0 } else { -1.0 };
    let ij = bessel_i_dd(j, z);
    let log_term = log_half * ij * Dd::from_f64(-sign_j);
    // ½ (-1)^j (z/2)^j Σ (ψ(k+1) + ψ(j+k+1)) y^k / (k!(j+k)!)
    let mut jf = Dd::ONE;
    for k in 1..=j {
        jf = jf.mul_f64(k as f64);
    }
    let mut t = jf.recip();
    let mut pa = psi_dd(1);
    let mut pb = psi_dd(j + 1);
    let mut s = (pa + pb) * t;
    for k in 1..2000u32 {
        t = (t * y).div_f64(k as f64 * (j + k) as f64);
        pa = pa + Dd::ONE.div_f64(k as f64);
        pb = pb + Dd::ONE.div_f64((j + k) as f64);
        let term = (pa + pb) * t;
        s = s + term;
        if term.abs().hi < 1e-34 * s.abs().hi {
            break;
        }
    }
    let tail = s * half.powi(j) * Dd::from_f64(0.5 * sign_j);
    fin + log_term + tail
}

/// `I_j(z) K_j(z)` from the double-double series.
pub fn series_product_dd(j: u32, z: f64) -> f64 {
    (bessel_i_dd(j, z) * bessel_k_dd(j, z)).to_f64()
}

/// Nicholson-type integral of `I_j K_j` by tanh-sinh quadrature with step `h`.
pub fn nicholson_product(j: u32, z: f64, h: f64) -> f64 {
    let b = PI / 2.0;
    let v = tanh_sinh(
        |tau, _, db| {
            // cos τ = sin(π/2 - τ), exact near the singular end.
            let c = if db < 0.5 { db.sin() } else { tau.cos() };
            let k0 = bessel_k(0, 2.0 * z * c).unwrap_or(0.0);
            k0 * (2.0 * j as f64 * tau).cos()
        },
        0.0,
        b,
        h,
    );
    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
    2.0 * sign / PI * v
}

/// `K_ν(z) = ∫_0^∞ exp(-z cosh t) cosh(νt) dt` by adaptive Gauss–Kronrod.
pub fn k_integral(nu: u32, z: f64) -> f64 {
    let tmax = (1.0 + 60.0 / z).acosh();
    let f = |t: f64| (-z * (t.cosh() - 1.0)).exp() * (nu as f64 * t).cosh();
    adaptive(&f, 0.0, tmax, 1e-17) * (-z).exp()
}

/// `∂_λ^q (I_j K_j)(λ) = 2^q ∫_0^∞ J_0^{(q)}(u) s^q (s + √(1+s²))^{-2j} / √(u² + 4λ²) du`,
/// `s = u/(2λ)`. Convergent for `2j ≥ q`, and for `j = q = 0`.
pub fn laplace_product(j: u32, lambda: f64, q: u32) -> f64 {
    let two_l = 2.0 * lambda;
    let scale = 2f64.powi(q as i32);
    let f = move |u: f64| {
        let s = u / two_l;
        let w = (s + (1.0 + s * s).sqrt()).powi(-2 * j as i32) / (u * u + two_l * two_l).sqrt();
        scale * bessel_j0_deriv(q, u) * s.powi(q as i32) * w
    };
    // Asymptotic zeros of J_0^{(q)}: u = 3π/4 - qπ/2 + kπ.
    let phase = (0.75 - 0.5 * q as f64).rem_euclid(1.0) * PI;
    let first = phase + PI * (two_l / PI).ceil().max(2.0);
    let size = 1.0 / (2.0 * j as f64 + two_l + 1.0);
    let tol = 1e-18 * size;
    let mut sum = adaptive(&f, 0.0, first, tol);
    let mut sums = Vec::with_capacity(512);
    let mut small = 0;
    let mut a = first;
    for k in 0..4000 {
        let b = a + PI;
        let p = adaptive(&f, a, b, tol);
        sum += p;
        sums.push(sum);
        a = b;
        if p.abs() <= 1e-18 * sum.abs().max(size) {
            small += 1;
            if small >= 3 {
                return sum;
            }
        } else {
            small = 0;
        }
        if k >= 32 && k % 4 == 0 {
            let n = sums.len();
            let w1 = wynn_epsilon(&sums[n - 24..]);
            let w2 = wynn_epsilon(&sums[n - 25..n - 1]);
            if (w1 - w2).abs() <= 1e-14 * w1.abs().max(size) {
                return w1;
            }
        }
    }
    let n = sums.len();
    wynn_epsilon(&sums[n - 24..])
}

/// Brute-force `I_j(z)` series in plain `f64` with a fixed, generous term count.
pub fn bessel_i_bruteforce(j: u32, z: f64, terms: usize) -> f64 {
    let mut s = 0.0;
    for m in (0..terms).rev() {
        let mut t = 1.0;
        for k in 1..=(2 * m + j as usize) {
            t *= 0.5 * z;
            if k <= m {
                t /= k as f64;
            }
            if k <= m + j as usize {
                t /= k as f64;
            }
        }
        s += t;
    }
    s
}
