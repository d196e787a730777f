//! Bessel functions of integer order and the products `I_j K_j`.
//!
//! Production routes:
//! * `I_j`: power series up to `z = 30`, otherwise `I_0` by the periodic
//!   trapezoid rule times backward-recurrence ratios.
//! * `K_0, K_1`: series for `z ≤ 2`, trapezoid on the scaled integral
//!   `∫ exp(-z(cosh t - 1)) cosh(νt) dt` above. Higher orders by forward recurrence.
//! * `I_j K_j`: Wronskian ratio form `1/(z (K_{j+1}/K_j + I_{j+1}/I_j))`, or the
//!   large-argument expansion above the crossover when it converges.
//!
//! The [`oracle`] module holds independent representations used for validation.

pub mod dd;
pub mod oracle;
pub mod quad;

use std::f64::consts::PI;

pub const EULER_GAMMA: f64 = 0.5772156649015329;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BesselError {
    #[error("argument {0} outside the domain")]
    Domain(f64),
    #[error("I_{j}({z}) exceeds the floating point range")]
    Overflow { j: u32, z: f64 },
    #[error("K_{j}({z}) underflows")]
    Underflow { j: u32, z: f64 },
    #[error("derivative order {0} exceeds 6")]
    OrderTooHigh(u32),
    /// `2j ≤ q`: no decay bound. The value is still provided (central differences).
    #[error("no derivative bound for 2j <= q (j = {j}, q = {q})")]
    NoDerivativeBound { j: u32, q: u32, value: f64 },
    #[error("invalid policy: {0}")]
    Policy(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BesselPolicy {
    pub series_terms: usize,
    pub quad_nodes: usize,
    pub crossover_large_lambda: f64,
    pub small_x_cutoff: f64,
}

impl Default for BesselPolicy {
    fn default() -> Self {
        BesselPolicy {
            series_terms: 200,
            quad_nodes: 128,
            crossover_large_lambda: 15.0,
            small_x_cutoff: 0.5,
        }
    }
}

impl BesselPolicy {
    pub fn validate(&self) -> Result<(), BesselError> {
        if self.series_terms < 30 {
            return Err(BesselError::Policy("series_terms must be at least 30"));
        }
        if self.quad_nodes < 64 {
            return Err(BesselError::Policy("quad_nodes must be at least 64"));
        }
        if !(self.crossover_large_lambda > 0.0) {
            return Err(BesselError::Policy("crossover must be positive"));
        }
        if !(self.small_x_cutoff > 0.0 && self.small_x_cutoff < 1.0) {
            return Err(BesselError::Policy("small_x_cutoff must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// `ψ(n) = H_{n-1} - γ` for integer `n ≥ 1`.
pub fn psi(n: u32) -> f64 {
    assert!(n >= 1, "psi is evaluated at positive integers only");
    let h: f64 = (1..n).rev().map(|k| 1.0 / k as f64).sum();
    h - EULER_GAMMA
}

// ---------------------------------------------------------------- J_n

fn jn_trapezoid_all(nmax: usize, x: f64) -> Vec<f64> {
    // Periodic trapezoid of (1/2π)∫ cos(nθ - x sinθ) dθ; aliasing error ~ J_{N-n}(x).
    let nodes = (2.0 * (x.abs() + nmax as f64) + 64.0).ceil() as usize;
    let mut out = vec![0.0; nmax + 1];
    for k in 0..nodes {
        let th = 2.0 * PI * k as f64 / nodes as f64;
        let a = x * th.sin();
        for (n, o) in out.iter_mut().enumerate() {
            *o += (n as f64 * th - a).cos();
        }
    }
    out.iter_mut().for_each(|v| *v /= nodes as f64);
    out
}

fn jn_hankel(n: usize, x: f64) -> f64 {
    let mu = 4.0 * (n * n) as f64;
    let chi = x - (0.5 * n as f64 + 0.25) * PI;
    let (mut p, mut q) = (0.0, 0.0);
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..200usize {
        // term = a_k(n) / x^k
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * term;
        } else {
            q += sign * term;
        }
        let odd = (2 * k + 1) as f64;
        let next = term * (mu - odd * odd) / ((k + 1) as f64 * 8.0 * x);
        if next.abs() < 1e-17 * p.abs().max(1e-300) || next.abs() > last {
            break;
        }
        last = next.abs();
        term = next;
    }
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

const HANKEL_SWITCH: f64 = 30.0;

/// `J_0, …, J_nmax` at `x ≥ 0`.
pub fn bessel_jn_all(nmax: usize, x: f64) -> Vec<f64> {
    let ax = x.abs();
    let mut out = if ax <= HANKEL_SWITCH {
        jn_trapezoid_all(nmax, ax)
    } else {
        (0..=nmax).map(|n| jn_hankel(n, ax)).collect()
    };
    if x < 0.0 {
        for (n, v) in out.iter_mut().enumerate() {
            if n % 2 == 1 {
                *v = -*v;
            }
        }
    }
    out
}

/// `J_n(x)` for any integer order.
pub fn bessel_jn(n: i32, x: f64) -> f64 {
    let m = n.unsigned_abs() as usize;
    let v = bessel_jn_all(m, x)[m];
    if n < 0 && m % 2 == 1 {
        -v
    } else {
        v
    }
}

/// `J_0(x)` from its integral representation.
pub fn bessel_j0(x: f64) -> f64 {
    bessel_jn_all(0, x)[0].clamp(-1.0, 1.0)
}

/// `J_0(x)` by the power series; accurate for moderate `|x|` only.
pub fn bessel_j0_series(x: f64) -> f64 {
    let y = -0.25 * x * x;
    let mut t = 1.0;
    let mut s = 1.0;
    for m in 1..400 {
        t *= y / (m * m) as f64;
        s += t;
        if t.abs() < 1e-18 * s.abs().max(1e-300) && m as f64 > x.abs() {
            break;
        }
    }
    s
}

/// `J_0^{(q)}(u) = 2^{-q} Σ_k (-1)^k C(q,k) J_{2k-q}(u)`.
pub fn bessel_j0_deriv(q: u32, u: f64) -> f64 {
    let q = q as i64;
    let js = bessel_jn_all(q as usize, u);
    let mut acc = 0.0;
    let mut binom = 1.0;
    for k in 0..=q {
        let n = 2 * k - q;
        let m = n.unsigned_abs() as usize;
        let jn = if n < 0 && m % 2 == 1 { -js[m] } else { js[m] };
        let sgn = if k % 2 == 0 { 1.0 } else { -1.0 };
        acc += sgn * binom * jn;
        binom = binom * (q - k) as f64 / (k + 1) as f64;
    }
    acc / 2f64.powi(q as i32)
}

// ---------------------------------------------------------------- I_j

fn i_series(j: u32, z: f64, terms: usize) -> Option<f64> {
    let half = 0.5 * z;
    let mut t = 1.0;
    for k in 1..=j {
        t *= half / k as f64;
    }
    let y = half * half;
    let mut s = t;
    for m in 1..terms {
        t *= y / (m as f64 * (m as f64 + j as f64));
        s += t;
        if t <= 1e-17 * s {
            return Some(s);
        }
    }
    None
}

/// Ratios `p_k = I_{k+1}(z)/I_k(z)` for `k = 0..=j`, by backward recurrence.
fn i_ratios(j: u32, z: f64) -> Vec<f64> {
    let start = j.max(z.ceil() as u32) + 60;
    let mut p = 0.0;
    let mut out = vec![0.0; j as usize + 1];
    for k in (1..=start).rev() {
        // p_{k-1} = 1 / (2k/z + p_k)
        p = 1.0 / (2.0 * k as f64 / z + p);
        if (k - 1) <= j {
            out[(k - 1) as usize] = p;
        }
    }
    out
}

/// `exp(-z) I_0(z)` by the periodic trapezoid rule.
fn i0_scaled(z: f64) -> f64 {
    let nodes = (2.0 * z).ceil() as usize + 64;
    let mut s = 0.0;
    for k in 0..nodes {
        let th = 2.0 * PI * k as f64 / nodes as f64;
        s += (z * (th.cos() - 1.0)).exp();
    }
    s / nodes as f64
}

// ---------------------------------------------------------------- K_0, K_1

fn k01_series(z: f64) -> (f64, f64) {
    let y = 0.25 * z * z;
    let l = (0.5 * z).ln();
    let (mut i0, mut s0) = (1.0, 0.0);
    let (mut i1, mut s1) = (1.0, 1.0 - 2.0 * EULER_GAMMA);
    let mut t0 = 1.0; // y^m/(m!)^2
    let mut t1 = 1.0; // y^k/(k!(k+1)!)
    let mut h = 0.0; // H_m
    for m in 1..200 {
        let mf = m as f64;
        h += 1.0 / mf;
        t0 *= y / (mf * mf);
        t1 *= y / (mf * (mf + 1.0));
        i0 += t0;
        s0 += h * t0;
        i1 += t1;
        // ψ(m+1) + ψ(m+2) = 2 H_m + 1/(m+1) - 2γ
        s1 += (2.0 * h + 1.0 / (mf + 1.0) - 2.0 * EULER_GAMMA) * t1;
        if t0 < 1e-18 * i0 && t1 < 1e-18 * i1 {
            break;
        }
    }
    let k0 = -(l + EULER_GAMMA) * i0 + s0;
    let k1 = 1.0 / z + l * (0.5 * z * i1) - 0.25 * z * s1;
    (k0, k1)
}

/// `exp(z) K_ν(z)` for `ν ∈ {0, 1}` by the trapezoid rule on the scaled integral.
pub fn k01_integral_scaled(z: f64) -> (f64, f64) {
    let h = (0.5 / z.sqrt()).min(0.15);
    let tmax = (1.0 + 45.0 / z).acosh();
    let n = (tmax / h).ceil() as usize;
    let (mut s0, mut s1) = (0.5, 0.5);
    for k in 1..=n {
        let t = k as f64 * h;
        let e = (-z * (t.cosh() - 1.0)).exp();
        s0 += e;
        s1 += e * t.cosh();
    }
    (h * s0, h * s1)
}

/// `(exp(z) K_0(z), exp(z) K_1(z))`.
fn k01_scaled(z: f64) -> (f64, f64) {
    if z <= 2.0 {
        let (k0, k1) = k01_series(z);
        let e = z.exp();
        (k0 * e, k1 * e)
    } else {
        k01_integral_scaled(z)
    }
}

// ---------------------------------------------------------------- evaluator

/// Bessel evaluator carrying a [`BesselPolicy`].
#[derive(Debug, Clone, Copy, Default)]
pub struct Bessel {
    pub policy: BesselPolicy,
}

impl Bessel {
    pub fn new(policy: BesselPolicy) -> Result<Self, BesselError> {
        policy.validate()?;
        Ok(Bessel { policy })
    }

    pub fn i(&self, j: u32, z: f64) -> Result<f64, BesselError> {
        if !(z >= 0.0) {
            return Err(BesselError::Domain(z));
        }
        if z == 0.0 {
            return Ok(if j == 0 { 1.0 } else { 0.0 });
        }
        if z > 700.0 {
            return Err(BesselError::Overflow { j, z });
        }
        if z <= 30.0 {
            if let Some(v) = i_series(j, z, self.policy.series_terms) {
                return Ok(v);
            }
        }
        let p = i_ratios(j, z);
        let mut v = i0_scaled(z) * z.exp();
        for pk in &p[..j as usize] {
            v *= pk;
        }
        Ok(v)
    }

    pub fn k(&self, j: u32, z: f64) -> Result<f64, BesselError> {
        if !(z > 0.0) {
            return Err(BesselError::Domain(z));
        }
        let (mut a, mut b) = k01_scaled(z);
        if j == 0 {
            b = a;
        } else {
            for k in 1..j {
                let c = a + 2.0 * k as f64 / z * b;
                a = b;
                b = c;
                if !b.is_finite() {
                    return Err(BesselError::Overflow { j, z });
                }
            }
        }
        let v = b * (-z).exp();
        if !v.is_finite() {
            return Err(BesselError::Overflow { j, z });
        }
        if v == 0.0 {
            return Err(BesselError::Underflow { j, z });
        }
        Ok(v)
    }

    /// `I_j(λ) K_j(λ)`.
    pub fn product_ik(&self, j: u32, lambda: f64) -> Result<f64, BesselError> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(BesselError::Domain(lambda));
        }
        if lambda >= self.policy.crossover_large_lambda {
            if let Some(v) = asym_lambda_converged(j, lambda) {
                return Ok(v);
            }
        }
        Ok(product_ik_ratio(j, lambda))
    }

    /// `∂_λ^q (I_j K_j)(λ)` through the differentiated Laplace integral.
    pub fn product_ik_deriv(&self, j: u32, lambda: f64, q: u32) -> Result<f64, BesselError> {
        if !(lambda > 0.0) {
            return Err(BesselError::Domain(lambda));
        }
        if q > 6 {
            return Err(BesselError::OrderTooHigh(q));
        }
        if 2 * j <= q {
            let value = if q == 0 {
                self.product_ik(j, lambda)?
            } else {
                self.product_ik_fd(j, lambda, q)?
            };
            return Err(BesselError::NoDerivativeBound { j, q, value });
        }
        Ok(oracle::laplace_product(j, lambda, q))
    }

    /// Central finite-difference derivative of `I_j K_j`, step `~ ε^{1/(q+2)}`.
    pub fn product_ik_fd(&self, j: u32, lambda: f64, q: u32) -> Result<f64, BesselError> {
        let h = lambda.min(1.0) * f64::EPSILON.powf(1.0 / (q as f64 + 2.0));
        central_difference(|x| self.product_ik(j, x), lambda, h, q)
    }

    pub fn kernel_f(&self, x: f64) -> Result<f64, BesselError> {
        if !(x > 0.0) {
            return Err(BesselError::Domain(x));
        }
        if x < self.policy.small_x_cutoff {
            Ok(kernel_f_series(x))
        } else {
            kernel_f_direct(x)
        }
    }

    pub fn kernel_g(&self, x: f64) -> Result<f64, BesselError> {
        if !(x > 0.0) {
            return Err(BesselError::Domain(x));
        }
        if x < self.policy.small_x_cutoff {
            let (p, q) = kernel_g_series_parts(x);
            Ok((0.5 * x).ln() * p + q)
        } else {
            kernel_g_direct(x)
        }
    }

    /// `g(x) = log(x/2) P(x²/4) + Q(x²/4)`, returned as `(P, Q)`.
    pub fn kernel_g_parts(&self, x: f64) -> Result<(f64, f64), BesselError> {
        if !(x > 0.0) {
            return Err(BesselError::Domain(x));
        }
        let (p, q) = kernel_g_series_parts(x);
        if x < self.policy.small_x_cutoff {
            Ok((p, q))
        } else {
            Ok((p, kernel_g_direct(x)? - (0.5 * x).ln() * p))
        }
    }
}

fn central_difference<F>(f: F, x: f64, h: f64, q: u32) -> Result<f64, BesselError>
where
    F: Fn(f64) -> Result<f64, BesselError>,
{
    // Δ_h^q f(x) / h^q with nodes x + (k - q/2) h.
    let mut acc = 0.0;
    let mut binom = 1.0;
    for k in 0..=q {
        let sgn = if (q - k) % 2 == 0 { 1.0 } else { -1.0 };
        let xk = x + (k as f64 - 0.5 * q as f64) * h;
        if xk <= 0.0 {
            return Err(BesselError::Domain(xk));
        }
        acc += sgn * binom * f(xk)?;
        binom = binom * (q - k) as f64 / (k + 1) as f64;
    }
    Ok(acc / h.powi(q as i32))
}

/// Wronskian ratio form of `I_j K_j`.
fn product_ik_ratio(j: u32, z: f64) -> f64 {
    let (k0, k1) = k01_scaled(z);
    let mut qk = k1 / k0;
    for k in 1..=j {
        // K_{k+1}/K_k = K_{k-1}/K_k + 2k/z
        qk = 1.0 / qk + 2.0 * k as f64 / z;
    }
    let p = i_ratios(j, z)[j as usize];
    1.0 / (z * (qk + p))
}

fn asym_lambda_converged(j: u32, lambda: f64) -> Option<f64> {
    let mu = 4.0 * (j as f64) * (j as f64);
    let x = 1.0 / (4.0 * lambda * lambda);
    let mut a = 1.0;
    let mut poly = mu - 1.0;
    let mut s = 1.0;
    let mut pw = 1.0;
    let mut last = f64::INFINITY;
    for m in 1..80u32 {
        let mf = m as f64;
        a *= -(2.0 * mf - 1.0) / (2.0 * mf);
        if m >= 2 {
            let o = 2.0 * mf - 1.0;
            poly *= mu - o * o;
        }
        pw *= x;
        let t = a * poly * pw;
        if t.abs() > last {
            return None;
        }
        s += t;
        if t.abs() < 1e-17 * s.abs() {
            return Some(s / (2.0 * lambda));
        }
        last = t.abs();
    }
    None
}

/// Truncated large-argument expansion `(1/2λ)(1 + Σ_{m=1}^N α_{j,m}/(2λ)^{2m})`.
pub fn product_ik_asym_lambda(j: u32, lambda: f64, n: u32) -> f64 {
    let mut s = 1.0;
    let x = 1.0 / (4.0 * lambda * lambda);
    let mut pw = 1.0;
    for m in 1..=n {
        pw *= x;
        s += alpha(j, m) * pw;
    }
    s / (2.0 * lambda)
}

/// High-order expansion `(1/2j)(Σ b_m/j^m)(Σ (-1)^m b_m/j^m)` with `m ≤ order`.
pub fn product_ik_asym_j(j: u32, lambda: f64, order: u32) -> f64 {
    let c = AsymptoticCoeffs::new(0, order as usize);
    let jf = j as f64;
    let (mut plus, mut minus) = (0.0, 0.0);
    for m in 0..=order as usize {
        let b = c.b(m, lambda) / jf.powi(m as i32);
        plus += b;
        minus += if m % 2 == 0 { b } else { -b };
    }
    plus * minus / (2.0 * jf)
}

/// `α_{j,m} = a_m (μ - 1) Q_m(μ)` with `μ = 4j²`.
pub fn alpha(j: u32, m: u32) -> f64 {
    if m == 0 {
        return 1.0;
    }
    let mu = 4.0 * (j as f64) * (j as f64);
    let mut a = 1.0;
    for k in 1..=m {
        a *= -(2.0 * k as f64 - 1.0) / (2.0 * k as f64);
    }
    let mut poly = mu - 1.0;
    for l in 2..=m {
        let o = 2.0 * l as f64 - 1.0;
        poly *= mu - o * o;
    }
    a * poly
}

/// Tables for the two asymptotic expansions.
#[derive(Debug, Clone)]
pub struct AsymptoticCoeffs {
    /// `alpha[j][m]`
    pub alpha: Vec<Vec<f64>>,
    /// `b_poly[m][k]`: coefficient of `λ^{2k}` in `b_m(λ)`.
    pub b_poly: Vec<Vec<f64>>,
    /// `stirling[m][k] = S(m, k)`.
    pub stirling: Vec<Vec<u64>>,
}

impl AsymptoticCoeffs {
    pub fn new(jmax: u32, mmax: usize) -> Self {
        let alpha = (0..=jmax)
            .map(|j| (0..=mmax as u32).map(|m| alpha(j, m)).collect())
            .collect();
        let mut stirling = vec![vec![0u64; mmax + 1]; mmax + 1];
        stirling[0][0] = 1;
        for m in 1..=mmax {
            for k in 1..=m {
                stirling[m][k] = stirling[m - 1][k - 1] + k as u64 * stirling[m - 1][k];
            }
        }
        let mut b_poly = vec![vec![0.0; mmax + 1]; mmax + 1];
        b_poly[0][0] = 1.0;
        for m in 1..=mmax {
            let mut fact = 1.0;
            for k in 1..=m {
                fact *= k as f64;
                let sgn = if (m - k) % 2 == 0 { 1.0 } else { -1.0 };
                b_poly[m][k] = sgn * stirling[m][k] as f64 / (fact * 4f64.powi(k as i32));
            }
        }
        AsymptoticCoeffs { alpha, b_poly, stirling }
    }

    /// `b_m(λ)`.
    pub fn b(&self, m: usize, lambda: f64) -> f64 {
        let l2 = lambda * lambda;
        self.b_poly[m].iter().rev().fold(0.0, |acc, c| acc * l2 + c)
    }
}

// ---------------------------------------------------------------- f, g

/// `f(x) = -2(xK_1(x) - 1)/x²` by its series (all terms of one sign per sum).
pub fn kernel_f_series(x: f64) -> f64 {
    let y = 0.25 * x * x;
    let l = (0.5 * x).ln();
    let mut t = 1.0; // y^k/(k!(k+1)!)
    let mut a = 1.0;
    let mut b = 1.0 - 2.0 * EULER_GAMMA;
    let mut h = 0.0;
    for k in 1..300 {
        let kf = k as f64;
        h += 1.0 / kf;
        t *= y / (kf * (kf + 1.0));
        a += t;
        b += (2.0 * h + 1.0 / (kf + 1.0) - 2.0 * EULER_GAMMA) * t;
        if t < 1e-18 * a {
            break;
        }
    }
    -l * a + 0.5 * b
}

pub fn kernel_f_direct(x: f64) -> Result<f64, BesselError> {
    let k1 = Bessel::default().k(1, x)?;
    Ok(-2.0 * (x * k1 - 1.0) / (x * x))
}

/// `(P, Q)` with `g = log(x/2) P + Q` summed as series.
pub fn kernel_g_series_parts(x: f64) -> (f64, f64) {
    let y = 0.25 * x * x;
    let mut t = 0.5; // y^k/(k!(k+2)!)
    let mut a = t;
    // ψ(k+1) + ψ(k+3) at k = 0: -γ + (3/2 - γ)
    let mut b = (1.5 - 2.0 * EULER_GAMMA) * t;
    let mut h = 0.0;
    for k in 1..300 {
        let kf = k as f64;
        h += 1.0 / kf;
        t *= y / (kf * (kf + 2.0));
        a += t;
        let s = 2.0 * h + 1.0 / (kf + 1.0) + 1.0 / (kf + 2.0) - 2.0 * EULER_GAMMA;
        b += s * t;
        if t < 1e-18 * a {
            break;
        }
    }
    (-0.5 * a, 0.25 * b)
}

pub fn kernel_g_direct(x: f64) -> Result<f64, BesselError> {
    let b = Bessel::default();
    let k0 = b.k(0, x)?;
    let k1 = b.k(1, x)?;
    let k2 = k0 + 2.0 / x * k1;
    let x2 = x * x;
    Ok((x2 + 2.0 * x2 * k2 - 4.0) / (x2 * x2))
}

// ---------------------------------------------------------------- free functions

pub fn bessel_i(j: u32, z: f64) -> Result<f64, BesselError> {
    Bessel::default().i(j, z)
}

pub fn bessel_k(j: u32, z: f64) -> Result<f64, BesselError> {
    Bessel::default().k(j, z)
}

/// `I_j(λ) K_j(λ)` with the default policy. Panics only on invalid `λ`.
pub fn product_ik(j: u32, lambda: f64) -> f64 {
    Bessel::default()
        .product_ik(j, lambda)
        .expect("product_ik requires λ > 0")
}

pub fn product_ik_deriv(j: u32, lambda: f64, q: u32) -> Result<f64, BesselError> {
    Bessel::default().product_ik_deriv(j, lambda, q)
}

/// Derivative value regardless of whether the decay bound applies.
pub fn product_ik_deriv_value(j: u32, lambda: f64, q: u32) -> f64 {
    match product_ik_deriv(j, lambda, q) {
        Ok(v) => v,
        Err(BesselError::NoDerivativeBound { value, .. }) => value,
        Err(e) => panic!("{e}"),
    }
}

pub fn kernel_f(x: f64) -> Result<f64, BesselError> {
    Bessel::default().kernel_f(x)
}

pub fn kernel_g(x: f64) -> Result<f64, BesselError> {
    Bessel::default().kernel_g(x)
}

#[cfg(test)]
mod tests;
