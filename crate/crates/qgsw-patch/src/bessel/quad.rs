//! Quadrature rules used by the Bessel oracles.

use std::f64::consts::FRAC_PI_2;

/// Tanh-sinh rule on `[a, b]` with step `h`. The integrand receives
/// `(x, x - a, b - x)` so that endpoint singularities can be evaluated
/// from the distances without cancellation.
pub fn tanh_sinh<F>(f: F, a: f64, b: f64, h: f64) -> f64
where
    F: Fn(f64, f64, f64) -> f64,
{
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    let kmax = (4.0 / h).ceil() as i64;
    for k in -kmax..=kmax {
        let t = k as f64 * h;
        let u = FRAC_PI_2 * t.sinh();
        let ch = u.cosh();
        let w = FRAC_PI_2 * t.cosh() / (ch * ch);
        if w * half < 1e-300 {
            continue;
        }
        // 1 - tanh|u| without cancellation.
        let e = (-2.0 * u.abs()).exp();
        let comp = 2.0 * e / (1.0 + e);
        let (da, db) = if u >= 0.0 {
            (half * (2.0 - comp), half * comp)
        } else {
            (half * comp, half * (2.0 - comp))
        };
        if da <= 0.0 || db <= 0.0 {
            continue;
        }
        let x = if u >= 0.0 { b - db } else { a + da };
        acc += w * f(x, da, db);
    }
    acc * half * h
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One Gauss–Kronrod 7/15 panel: `(kronrod, error estimate, at_floor)`.
/// `at_floor` is set when the estimate is below the rounding level of `∫|f|`.
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, bool) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    let mut kabs = WGK[7] * fc.abs();
    for i in 0..7 {
        let dx = h * XGK[i];
        let (l, r) = (f(c - dx), f(c + dx));
        k += WGK[i] * (l + r);
        kabs += WGK[i] * (l.abs() + r.abs());
        if i % 2 == 1 {
            g += WG[i / 2] * (l + r);
        }
    }
    let raw = ((k - g) * h).abs();
    let floor = 50.0 * f64::EPSILON * kabs * h.abs();
    (k * h, raw, raw <= floor)
}

/// Adaptive bisection with Gauss–Kronrod panels to absolute tolerance `tol`.
/// Panels whose error estimate sits at rounding level are accepted.
pub fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, whole: (f64, f64, bool), depth: u32) -> f64 {
        let (v, err, at_floor) = whole;
        if err <= tol || at_floor || depth == 0 {
            return v;
        }
        let m = 0.5 * (a + b);
        let l = gk15(f, a, m);
        let r = gk15(f, m, b);
        rec(f, a, m, 0.5 * tol, l, depth - 1) + rec(f, m, b, 0.5 * tol, r, depth - 1)
    }
    let whole = gk15(f, a, b);
    rec(f, a, b, tol, whole, 24)
}

/// Wynn epsilon extrapolation of a sequence of partial sums. Returns the
/// last entry of the deepest even column.
pub fn wynn_epsilon(s: &[f64]) -> f64 {
    let n = s.len();
    if n < 3 {
        return *s.last().unwrap_or(&0.0);
    }
    let mut prev = vec![0.0; n + 1];
    let mut cur = s.to_vec();
    let mut best = s[n - 1];
    for k in 1..n {
        let mut next = Vec::with_capacity(n - k);
        for i in 0..n - k {
            let d = cur[i + 1] - cur[i];
            if d == 0.0 {
                // The column has converged exactly.
                return if k % 2 == 1 { cur[i + 1] } else { best };
            }
            next.push(prev[i + 1] + 1.0 / d);
        }
        if k % 2 == 0 {
            best = next[next.len() - 1];
        }
        prev = cur;
        cur = next;
    }
    best
}
