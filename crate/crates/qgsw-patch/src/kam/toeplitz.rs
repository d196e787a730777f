//! Operators on the normal modes whose matrix entries depend on the time
//! frequency only through `l = l_out − l_in`.

use super::bracket_lj;
use crate::bessel::product_ik;
use crate::spectrum::{lattice_ball, SpectrumContext};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Normal modes `1 ≤ |j| ≤ jmax` with `±j` not a site.
pub fn normal_modes(sites: &[u32], jmax: u32) -> Vec<i64> {
    (-(jmax as i64)..=jmax as i64)
        .filter(|&j| j != 0 && !sites.contains(&(j.unsigned_abs() as u32)))
        .collect()
}

/// `T^j_{j₀}(l)`: coefficient of `e^{i(l·φ + jθ)}` in `T e^{i j₀ θ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzOperator {
    pub d: usize,
    pub lcap: usize,
    pub modes: Vec<i64>,
    ls: Vec<Vec<i64>>,
    lindex: HashMap<Vec<i64>, usize>,
    mindex: HashMap<i64, usize>,
    data: Vec<Complex64>,
}

impl ToeplitzOperator {
    pub fn zero(d: usize, lcap: usize, modes: Vec<i64>) -> Self {
        let ls = lattice_ball(d, lcap as u32);
        let lindex = ls.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
        let mindex = modes.iter().enumerate().map(|(i, &j)| (j, i)).collect();
        let n = modes.len();
        ToeplitzOperator { d, lcap, data: vec![ZERO; ls.len() * n * n], modes, ls, lindex, mindex }
    }

    fn same_shape(&self) -> Self {
        ToeplitzOperator { data: vec![ZERO; self.data.len()], ..self.clone() }
    }

    fn slot(&self, l: &[i64], j: i64, j0: i64) -> Option<usize> {
        let n = self.modes.len();
        Some((self.lindex.get(l)? * n + self.mindex.get(&j)?) * n + self.mindex.get(&j0)?)
    }

    pub fn get(&self, l: &[i64], j: i64, j0: i64) -> Complex64 {
        self.slot(l, j, j0).map_or(ZERO, |i| self.data[i])
    }

    pub fn set(&mut self, l: &[i64], j: i64, j0: i64, v: Complex64) {
        let i = self.slot(l, j, j0).expect("entry outside the truncation");
        self.data[i] = v;
    }

    /// All stored entries `(l, j, j₀, value)`.
    pub fn entries(&self) -> impl Iterator<Item = (&[i64], i64, i64, Complex64)> + '_ {
        let n = self.modes.len();
        self.data.iter().enumerate().map(move |(i, &v)| {
            let (li, rest) = (i / (n * n), i % (n * n));
            (self.ls[li].as_slice(), self.modes[rest / n], self.modes[rest % n], v)
        })
    }

    pub fn map_entries(&self, mut f: impl FnMut(&[i64], i64, i64, Complex64) -> Complex64) -> Self {
        let mut out = self.same_shape();
        for (i, (l, j, j0, v)) in self.entries().enumerate() {
            out.data[i] = f(l, j, j0, v);
        }
        out
    }

    pub fn axpy(&self, a: f64, other: &Self) -> Self {
        assert_eq!(self.data.len(), other.data.len());
        let mut out = self.clone();
        out.data.iter_mut().zip(&other.data).for_each(|(x, y)| *x += y * a);
        out
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map_entries(|_, _, _, v| v * a)
    }

    /// Composition `self ∘ other`, with the time frequencies kept in the `l` ball.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.modes, other.modes);
        let n = self.modes.len();
        let nn = n * n;
        let mut out = self.same_shape();
        for (ia, la) in self.ls.iter().enumerate() {
            let a = &self.data[ia * nn..(ia + 1) * nn];
            if a.iter().all(|v| *v == ZERO) {
                continue;
            }
            for (ib, lb) in other.ls.iter().enumerate() {
                let sum: Vec<i64> = la.iter().zip(lb).map(|(x, y)| x + y).collect();
                let Some(&ic) = self.lindex.get(&sum) else { continue };
                let b = &other.data[ib * nn..(ib + 1) * nn];
                if b.iter().all(|v| *v == ZERO) {
                    continue;
                }
                let c = &mut out.data[ic * nn..(ic + 1) * nn];
                for r in 0..n {
                    for k in 0..n {
                        let x = a[r * n + k];
                        if x == ZERO {
                            continue;
                        }
                        for col in 0..n {
                            c[r * n + col] += x * b[k * n + col];
                        }
                    }
                }
            }
        }
        out
    }

    /// `⌊T⌋`: the entries `(0, j, j)`.
    pub fn diagonal(&self) -> BTreeMap<i64, Complex64> {
        let zero = vec![0; self.d];
        self.modes.iter().map(|&j| (j, self.get(&zero, j, j))).collect()
    }

    pub fn diagonal_operator(&self) -> Self {
        let zero = vec![0i64; self.d];
        self.map_entries(|l, j, j0, v| if j == j0 && l == zero.as_slice() { v } else { ZERO })
    }

    /// `P_N`: keep `|l|₁ ≤ N` and `|j − j₀| ≤ N`.
    pub fn project(&self, n: usize) -> Self {
        self.map_entries(|l, j, j0, v| if in_band(l, j - j0, n) { v } else { ZERO })
    }

    pub fn project_perp(&self, n: usize) -> Self {
        self.map_entries(|l, j, j0, v| if in_band(l, j - j0, n) { ZERO } else { v })
    }

    /// `max |T^{−j}_{−j₀}(−l) − sign·T^j_{j₀}(l)|`.
    pub fn symmetry_defect(&self, sign: f64) -> f64 {
        self.entries()
            .map(|(l, j, j0, v)| {
                let neg: Vec<i64> = l.iter().map(|x| -x).collect();
                (self.get(&neg, -j, -j0) - v * sign).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Average each entry with its mirror `sign·T^{−j}_{−j₀}(−l)`.
    pub fn symmetrized(&self, sign: f64) -> Self {
        self.map_entries(|l, j, j0, v| {
            let neg: Vec<i64> = l.iter().map(|x| -x).collect();
            0.5 * (v + self.get(&neg, -j, -j0) * sign)
        })
    }

    pub fn max_re(&self) -> f64 {
        self.data.iter().fold(0.0, |a, v| a.max(v.re.abs()))
    }

    pub fn max_im(&self) -> f64 {
        self.data.iter().fold(0.0, |a, v| a.max(v.im.abs()))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, v| a.max(v.norm()))
    }
}

fn in_band(l: &[i64], m: i64, n: usize) -> bool {
    l.iter().map(|x| x.unsigned_abs()).sum::<u64>() <= n as u64 && m.unsigned_abs() <= n as u64
}

/// `‖T‖²_s = Σ_{(l,m)} ⟨l,m⟩^{2s} sup_{j−j₀=m} |T^j_{j₀}(l)|²`.
pub fn offdiag_norm(t: &ToeplitzOperator, s: f64) -> f64 {
    let mut sup: HashMap<(Vec<i64>, i64), f64> = HashMap::new();
    for (l, j, j0, v) in t.entries() {
        let e = sup.entry((l.to_vec(), j - j0)).or_insert(0.0);
        *e = e.max(v.norm());
    }
    sup.iter().map(|((l, m), v)| bracket_lj(l, *m).powf(2.0 * s) * v * v).sum::<f64>().sqrt()
}

/// Real reversible diagonal `𝒟 = diag(iμ_j)` on the normal modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalSpectrum {
    pub mu: BTreeMap<i64, f64>,
    pub base: SpectrumContext,
}

impl DiagonalSpectrum {
    /// `μ_j = j c − j I_{|j|}K_{|j|}(λ)`; `c = V₀` gives the equilibrium frequencies.
    pub fn from_transport(base: &SpectrumContext, modes: &[i64], c: f64) -> Self {
        let mu = modes
            .iter()
            .map(|&j| (j, j as f64 * (c - product_ik(j.unsigned_abs() as u32, base.lambda))))
            .collect();
        DiagonalSpectrum { mu, base: base.clone() }
    }

    pub fn get(&self, j: i64) -> f64 {
        *self.mu.get(&j).unwrap_or_else(|| panic!("mode {j} not in the spectrum"))
    }

    pub fn modes(&self) -> Vec<i64> {
        self.mu.keys().copied().collect()
    }

    /// `max |μ_{−j} + μ_j|`.
    pub fn reversibility_defect(&self) -> f64 {
        self.mu.iter().map(|(j, v)| self.mu.get(&-j).map_or(f64::INFINITY, |w| (v + w).abs())).fold(0.0, f64::max)
    }
}
