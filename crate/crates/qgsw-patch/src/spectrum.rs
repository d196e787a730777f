//! Linear frequencies of the disc equilibrium and their Diophantine properties.

use crate::bessel::{product_ik, product_ik_deriv, BesselError};
use crate::par::{map_range, Exec};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectrumError {
    #[error("lambda = {0} outside ({1}, {2})")]
    LambdaRange(f64, f64, f64),
    #[error("Omega must be positive, got {0}")]
    Omega(f64),
    #[error("sites must be nonempty, positive and strictly increasing")]
    Sites,
    #[error("q0 = {0} exceeds 4")]
    Order(u32),
    #[error("non-positive transversality estimate {0:e} ({1:?})")]
    Degenerate(f64, TransversalityMode),
    #[error(transparent)]
    Bessel(#[from] BesselError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumContext {
    pub lambda: f64,
    pub omega: f64,
    pub sites: Vec<u32>,
}

/// Admissible λ window; the context constructor rejects values outside it.
pub const LAMBDA_RANGE: (f64, f64) = (1e-8, 1e4);

impl SpectrumContext {
    pub fn new(lambda: f64, omega: f64, sites: Vec<u32>) -> Result<Self, SpectrumError> {
        let (lo, hi) = LAMBDA_RANGE;
        if !(lambda > lo && lambda < hi) {
            return Err(SpectrumError::LambdaRange(lambda, lo, hi));
        }
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(SpectrumError::Omega(omega));
        }
        if sites.is_empty() || sites[0] == 0 || sites.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SpectrumError::Sites);
        }
        Ok(SpectrumContext { lambda, omega, sites })
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        SpectrumContext { lambda, ..self.clone() }
    }
}

/// `Ω_j(λ) = j (Ω + I_1K_1 - I_jK_j)`, exactly odd in `j`.
pub fn omega_j(ctx: &SpectrumContext, j: i64) -> f64 {
    if j == 0 {
        return 0.0;
    }
    let a = j.unsigned_abs() as u32;
    let l = ctx.lambda;
    let v = a as f64 * (ctx.omega + product_ik(1, l) - product_ik(a, l));
    if j < 0 {
        -v
    } else {
        v
    }
}

/// `V_0 = Ω + I_1K_1`.
pub fn v0(ctx: &SpectrumContext) -> f64 {
    ctx.omega + product_ik(1, ctx.lambda)
}

pub fn frequency_vector(ctx: &SpectrumContext) -> Vec<f64> {
    ctx.sites.iter().map(|&j| omega_j(ctx, j as i64)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub j: u32,
    pub omega_j: f64,
    pub residual: f64,
    pub scaled: f64,
}

/// Rows `Ω_j - V_0 j + 1/2 - λ²/(4j²)` and the same times `j⁴`.
pub fn asymptotic_residual(ctx: &SpectrumContext, js: impl IntoIterator<Item = u32>) -> Vec<ResidualRow> {
    let l2 = ctx.lambda * ctx.lambda;
    js.into_iter()
        .map(|j| {
            let jf = j as f64;
            // Ω_j - V_0 j = -j I_jK_j, written so the large terms cancel analytically.
            let residual = -jf * product_ik(j, ctx.lambda) + 0.5 - l2 / (4.0 * jf * jf);
            ResidualRow { j, omega_j: omega_j(ctx, j as i64), residual, scaled: residual * jf.powi(4) }
        })
        .collect()
}

/// `μ_j = 4j²`.
pub fn mu(j: u32) -> f64 {
    4.0 * (j as f64) * (j as f64)
}

/// `Q_m(X) = ∏_{ℓ=2}^m (X - (2ℓ-1)²)`.
pub fn q_poly(m: usize, x: f64) -> f64 {
    (2..=m).map(|l| x - ((2 * l - 1) * (2 * l - 1)) as f64).product()
}

/// Closed form `∏_{k<ℓ} (μ_{j_ℓ} - μ_{j_k})`.
pub fn nondegeneracy_det(sites: &[u32]) -> f64 {
    let mut p = 1.0;
    for (k, &a) in sites.iter().enumerate() {
        for &b in &sites[k + 1..] {
            p *= mu(b) - mu(a);
        }
    }
    p
}

/// Matrix `B[m][k] = Q_{m+1}(μ_{j_k})`.
pub fn nondegeneracy_matrix(sites: &[u32]) -> Vec<Vec<f64>> {
    let d = sites.len();
    (0..d)
        .map(|m| sites.iter().map(|&j| q_poly(m + 1, mu(j))).collect())
        .collect()
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for c in 0..n {
        let p = (c..n)
            .max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))
            .unwrap();
        if a[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c];
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    det
}

/// Smallest `|Ω_j ± Ω_{j₀}| / |j ± j₀|` over `1 ≤ j, j₀ ≤ jmax`.
pub fn lower_bound_c0(ctx: &SpectrumContext, jmax: u32) -> f64 {
    let w: Vec<f64> = (0..=jmax).map(|j| omega_j(ctx, j as i64)).collect();
    let mut c0 = f64::INFINITY;
    for j in 1..=jmax as usize {
        for j0 in 1..=jmax as usize {
            c0 = c0.min((w[j] + w[j0]).abs() / (j + j0) as f64);
            if j != j0 {
                c0 = c0.min((w[j] - w[j0]).abs() / (j as f64 - j0 as f64).abs());
            }
        }
    }
    c0
}

// ---------------------------------------------------------------- transversality

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransversalityMode {
    PureFrequency,
    PlusI1K1,
    PlusOmegaJ,
    Difference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstCase {
    pub l: Vec<i64>,
    pub j: i64,
    pub j0: i64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransversalityReport {
    pub rho0_estimate: f64,
    pub q0_used: u32,
    pub worst_case: WorstCase,
    pub mode: TransversalityMode,
    /// Minimum per case.
    pub per_mode: Vec<(TransversalityMode, f64)>,
    pub lambda_points: usize,
}

/// `⟨l⟩ = max(1, |l|_1)`.
pub fn bracket(l: &[i64]) -> f64 {
    (l.iter().map(|x| x.unsigned_abs()).sum::<u64>().max(1)) as f64
}

/// All `l ∈ ℤ^d` with `|l|_1 ≤ lmax`, in lexicographic order.
pub fn lattice_ball(d: usize, lmax: u32) -> Vec<Vec<i64>> {
    fn rec(d: usize, budget: i64, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if prefix.len() == d {
            out.push(prefix.clone());
            return;
        }
        for v in -budget..=budget {
            prefix.push(v);
            rec(d, budget - v.abs(), prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, lmax as i64, &mut Vec::new(), &mut out);
    out
}

/// `∂_λ^k (I_jK_j)` with central differences of step `h` when `2j ≤ k`.
fn ik_derivative(j: u32, lambda: f64, k: u32, h: f64) -> f64 {
    match product_ik_deriv(j, lambda, k) {
        Ok(v) => v,
        Err(_) => {
            let mut acc = 0.0;
            let mut binom = 1.0;
            for i in 0..=k {
                let sgn = if (k - i) % 2 == 0 { 1.0 } else { -1.0 };
                acc += sgn * binom * product_ik(j, lambda + (i as f64 - 0.5 * k as f64) * h);
                binom = binom * (k - i) as f64 / (i + 1) as f64;
            }
            acc / h.powi(k as i32)
        }
    }
}

/// Table `D[k][j] = ∂_λ^k (I_jK_j)(λ)` for `j ≤ jmax`, `k ≤ q0`; `D[k][0]` unused.
pub fn ik_derivative_table(lambda: f64, jmax: u32, q0: u32, h: f64) -> Vec<Vec<f64>> {
    (0..=q0)
        .map(|k| {
            (0..=jmax)
                .map(|j| if j == 0 { 0.0 } else if k == 0 { product_ik(j, lambda) } else { ik_derivative(j, lambda, k, h) })
                .collect()
        })
        .collect()
}

/// Scan the four transversality cases over a λ grid.
#[allow(clippy::too_many_arguments)]
pub fn transversality_scan(
    omega: f64,
    sites: &[u32],
    lambdas: &[f64],
    lmax: u32,
    jmax: u32,
    q0: u32,
    fd_step: f64,
    exec: Exec,
) -> Result<TransversalityReport, SpectrumError> {
    if q0 > 4 {
        return Err(SpectrumError::Order(q0));
    }
    let top = jmax.max(*sites.iter().max().ok_or(SpectrumError::Sites)?);
    let tables = map_range(exec, lambdas.len(), |i| ik_derivative_table(lambdas[i], top, q0, fd_step));
    // ∂^k Ω_j = j (δ_{k0} Ω + ∂^k I_1K_1 - ∂^k I_jK_j)
    let dj = |t: &Vec<Vec<f64>>, k: usize, j: u32| -> f64 {
        let base = if k == 0 { omega } else { 0.0 };
        j as f64 * (base + t[k][1] - t[k][j as usize])
    };
    let ls = lattice_ball(sites.len(), lmax);
    let normal: Vec<u32> = (1..=jmax).filter(|j| !sites.contains(j)).collect();

    struct Cand {
        mode: TransversalityMode,
        l: Vec<i64>,
        j: i64,
        j0: i64,
    }
    let mut cands = Vec::new();
    for l in &ls {
        let zero = l.iter().all(|&x| x == 0);
        if !zero {
            cands.push(Cand { mode: TransversalityMode::PureFrequency, l: l.clone(), j: 0, j0: 0 });
        }
        for j in 0..=jmax as i64 {
            for s in [1, -1] {
                if !(zero && j == 0) && !(j == 0 && s == -1) {
                    cands.push(Cand { mode: TransversalityMode::PlusI1K1, l: l.clone(), j: s * j, j0: 0 });
                }
            }
        }
        for &j in &normal {
            for s in [1i64, -1] {
                cands.push(Cand { mode: TransversalityMode::PlusOmegaJ, l: l.clone(), j: s * j as i64, j0: 0 });
            }
        }
        for &j in &normal {
            for &j0 in &normal {
                if zero && j == j0 {
                    continue;
                }
                for s in [1i64, -1] {
                    cands.push(Cand { mode: TransversalityMode::Difference, l: l.clone(), j: j as i64, j0: s * j0 as i64 });
                }
            }
        }
    }

    let eval = |c: &Cand, t: &Vec<Vec<f64>>, k: usize| -> f64 {
        let mut v: f64 = c.l.iter().zip(sites).map(|(&li, &s)| li as f64 * dj(t, k, s)).sum();
        let signed = |j: i64| if j < 0 { -dj(t, k, j.unsigned_abs() as u32) } else { dj(t, k, j as u32) };
        match c.mode {
            TransversalityMode::PureFrequency => {}
            TransversalityMode::PlusI1K1 => v += c.j as f64 * t[k][1],
            TransversalityMode::PlusOmegaJ => v += signed(c.j),
            TransversalityMode::Difference => v += signed(c.j) + signed(c.j0),
        }
        v
    };

    let per_cand = map_range(exec, cands.len(), |ci| {
        let c = &cands[ci];
        let mut best = (f64::INFINITY, 0usize);
        for (li, t) in tables.iter().enumerate() {
            let m = (0..=q0 as usize).map(|k| eval(c, t, k).abs()).fold(0.0, f64::max);
            if m < best.0 {
                best = (m, li);
            }
        }
        (best.0 / bracket(&c.l), best.1)
    });

    let modes = [
        TransversalityMode::PureFrequency,
        TransversalityMode::PlusI1K1,
        TransversalityMode::PlusOmegaJ,
        TransversalityMode::Difference,
    ];
    let mut per_mode: Vec<(TransversalityMode, f64)> = modes.iter().map(|&m| (m, f64::INFINITY)).collect();
    // Deterministic reduction: first minimum in enumeration order wins.
    let mut worst = (f64::INFINITY, 0usize);
    for (ci, &(v, _)) in per_cand.iter().enumerate() {
        let slot = modes.iter().position(|&m| m == cands[ci].mode).unwrap();
        per_mode[slot].1 = per_mode[slot].1.min(v);
        if v < worst.0 {
            worst = (v, ci);
        }
    }
    let c = &cands[worst.1];
    let report = TransversalityReport {
        rho0_estimate: worst.0,
        q0_used: q0,
        worst_case: WorstCase { l: c.l.clone(), j: c.j, j0: c.j0, lambda: lambdas[per_cand[worst.1].1] },
        mode: c.mode,
        per_mode,
        lambda_points: lambdas.len(),
    };
    if !(report.rho0_estimate > 0.0) {
        return Err(SpectrumError::Degenerate(report.rho0_estimate, report.mode));
    }
    Ok(report)
}
