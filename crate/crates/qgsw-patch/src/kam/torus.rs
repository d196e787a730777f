//! Truncated Fourier series on `𝕋^d × 𝕋`, stored densely on a box of side `2·cap + 1`.

use crate::spectrum::bracket;
use num_complex::Complex64;
use rustfft::FftPlanner;

/// `⟨l, j⟩ = max(1, |l|₁, |j|)`.
pub fn bracket_lj(l: &[i64], j: i64) -> f64 {
    bracket(l).max(j.unsigned_abs() as f64)
}

/// Real function `Σ f_{l,j} e^{i(l·φ + jθ)}` with `⟨l,j⟩ ≤ cap`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusFunction {
    pub d: usize,
    pub cap: usize,
    data: Vec<Complex64>,
}

impl TorusFunction {
    pub fn zero(d: usize, cap: usize) -> Self {
        assert!(d >= 1 && cap >= 1, "need d ≥ 1 and cap ≥ 1");
        let side = 2 * cap + 1;
        TorusFunction { d, cap, data: vec![Complex64::new(0.0, 0.0); side.pow(d as u32 + 1)] }
    }

    fn side(&self) -> usize {
        2 * self.cap + 1
    }

    /// Flat index of `(l, j)`; `None` outside the box.
    fn index(&self, l: &[i64], j: i64) -> Option<usize> {
        let c = self.cap as i64;
        let side = self.side();
        let mut idx = 0usize;
        for &x in l.iter().chain(std::iter::once(&j)) {
            if x.abs() > c {
                return None;
            }
            idx = idx * side + (x + c) as usize;
        }
        Some(idx)
    }

    fn unindex(&self, mut idx: usize) -> (Vec<i64>, i64) {
        let side = self.side();
        let c = self.cap as i64;
        let mut v = vec![0i64; self.d + 1];
        for slot in v.iter_mut().rev() {
            *slot = (idx % side) as i64 - c;
            idx /= side;
        }
        let j = v.pop().expect("d + 1 entries");
        (v, j)
    }

    pub fn in_support(&self, l: &[i64], j: i64) -> bool {
        bracket_lj(l, j) <= self.cap as f64
    }

    pub fn get(&self, l: &[i64], j: i64) -> Complex64 {
        match self.index(l, j) {
            Some(i) if self.in_support(l, j) => self.data[i],
            _ => Complex64::new(0.0, 0.0),
        }
    }

    /// Set `f_{l,j}` and its conjugate partner `f_{-l,-j}`.
    pub fn set_pair(&mut self, l: &[i64], j: i64, value: Complex64) {
        assert!(self.in_support(l, j), "mode outside the truncation");
        let i = self.index(l, j).expect("in box");
        let neg: Vec<i64> = l.iter().map(|x| -x).collect();
        let k = self.index(&neg, -j).expect("in box");
        if i == k {
            self.data[i] = Complex64::new(value.re, 0.0);
        } else {
            self.data[i] = value;
            self.data[k] = value.conj();
        }
    }

    /// Iterate over stored modes in the truncation, both members of each pair.
    pub fn modes(&self) -> impl Iterator<Item = (Vec<i64>, i64, Complex64)> + '_ {
        (0..self.data.len()).filter_map(move |i| {
            let (l, j) = self.unindex(i);
            if self.in_support(&l, j) {
                Some((l, j, self.data[i]))
            } else {
                None
            }
        })
    }

    /// Apply `f_{l,j} ↦ m(l, j) f_{l,j}` on the truncation.
    pub fn map_modes(&self, mut m: impl FnMut(&[i64], i64, Complex64) -> Complex64) -> Self {
        let mut out = TorusFunction::zero(self.d, self.cap);
        for i in 0..self.data.len() {
            let (l, j) = self.unindex(i);
            if self.in_support(&l, j) {
                out.data[i] = m(&l, j, self.data[i]);
            }
        }
        out
    }

    pub fn mean(&self) -> f64 {
        self.get(&vec![0; self.d], 0).re
    }

    /// `‖f‖²_{H^s} = Σ ⟨l,j⟩^{2s} |f_{l,j}|²`.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        self.modes().map(|(l, j, c)| bracket_lj(&l, j).powf(2.0 * s) * c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `Π_N`: keep `⟨l,j⟩ ≤ n`.
    pub fn project(&self, n: usize) -> Self {
        self.map_modes(|l, j, c| if bracket_lj(l, j) <= n as f64 { c } else { Complex64::new(0.0, 0.0) })
    }

    /// `Π_N^⊥ = Id - Π_N`.
    pub fn project_perp(&self, n: usize) -> Self {
        self.map_modes(|l, j, c| if bracket_lj(l, j) > n as f64 { c } else { Complex64::new(0.0, 0.0) })
    }

    pub fn d_theta(&self) -> Self {
        self.map_modes(|_, j, c| c * Complex64::new(0.0, j as f64))
    }

    /// `ω·∂_φ`.
    pub fn d_phi(&self, omega: &[f64]) -> Self {
        self.map_modes(|l, _, c| c * Complex64::new(0.0, dot(omega, l)))
    }

    pub fn axpy(&self, a: f64, other: &TorusFunction) -> Self {
        assert_eq!((self.d, self.cap), (other.d, other.cap));
        let data = self.data.iter().zip(&other.data).map(|(x, y)| x + y * a).collect();
        TorusFunction { d: self.d, cap: self.cap, data }
    }

    pub fn scale(&self, a: f64) -> Self {
        TorusFunction { d: self.d, cap: self.cap, data: self.data.iter().map(|x| x * a).collect() }
    }

    /// Largest violation of `f_{-l,-j} = conj(f_{l,j})`.
    pub fn reality_defect(&self) -> f64 {
        self.modes()
            .map(|(l, j, c)| {
                let neg: Vec<i64> = l.iter().map(|x| -x).collect();
                (self.get(&neg, -j) - c.conj()).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Largest violation of `f(-φ,-θ) = ±f(φ,θ)`; for real `f` this says the
    /// coefficients are real (even) or purely imaginary (odd).
    pub fn parity_defect(&self, even: bool) -> f64 {
        self.modes().map(|(_, _, c)| if even { c.im.abs() } else { c.re.abs() }).fold(0.0, f64::max)
    }

    pub fn max_coeff(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Grid values on `g` points per angle, `φ` axes first, `θ` fastest.
    pub fn to_grid(&self, g: usize) -> TorusGrid {
        assert!(g > 2 * self.cap, "grid does not resolve the truncation");
        let mut buf = vec![Complex64::new(0.0, 0.0); g.pow(self.d as u32 + 1)];
        for (l, j, c) in self.modes() {
            buf[wrap_index(&l, j, g)] += c;
        }
        fft_nd(&mut buf, self.d + 1, g, true);
        TorusGrid { d: self.d, g, values: buf.iter().map(|z| z.re).collect() }
    }

    /// Project grid values onto the truncation `⟨l,j⟩ ≤ cap`.
    pub fn from_grid(grid: &TorusGrid, cap: usize) -> Self {
        assert!(grid.g > 2 * cap, "grid does not resolve the truncation");
        let mut buf: Vec<Complex64> = grid.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_nd(&mut buf, grid.d + 1, grid.g, false);
        let scale = 1.0 / buf.len() as f64;
        let mut out = TorusFunction::zero(grid.d, cap);
        for i in 0..out.data.len() {
            let (l, j) = out.unindex(i);
            if out.in_support(&l, j) {
                out.data[i] = buf[wrap_index(&l, j, grid.g)] * scale;
            }
        }
        out
    }

    /// Same coefficients in a larger or smaller truncation.
    pub fn recap(&self, cap: usize) -> Self {
        let mut out = TorusFunction::zero(self.d, cap);
        for i in 0..out.data.len() {
            let (l, j) = out.unindex(i);
            if out.in_support(&l, j) {
                out.data[i] = self.get(&l, j);
            }
        }
        out
    }
}

pub fn dot(omega: &[f64], l: &[i64]) -> f64 {
    omega.iter().zip(l).map(|(w, &k)| w * k as f64).sum()
}

fn wrap_index(l: &[i64], j: i64, g: usize) -> usize {
    let gi = g as i64;
    l.iter().chain(std::iter::once(&j)).fold(0usize, |acc, &x| acc * g + x.rem_euclid(gi) as usize)
}

/// Samples on the uniform grid of `𝕋^{d+1}`, `θ` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusGrid {
    pub d: usize,
    pub g: usize,
    pub values: Vec<f64>,
}

impl TorusGrid {
    pub fn constant(d: usize, g: usize, v: f64) -> Self {
        TorusGrid { d, g, values: vec![v; g.pow(d as u32 + 1)] }
    }

    pub fn rows(&self) -> usize {
        self.values.len() / self.g
    }

    /// Angles `φ` of row `r`.
    pub fn row_phi(&self, r: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.d];
        let mut idx = r;
        for slot in out.iter_mut().rev() {
            *slot = 2.0 * std::f64::consts::PI * (idx % self.g) as f64 / self.g as f64;
            idx /= self.g;
        }
        out
    }

    pub fn zip_map(&self, other: &TorusGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!((self.d, self.g), (other.d, other.g));
        TorusGrid { d: self.d, g: self.g, values: self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect() }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        TorusGrid { d: self.d, g: self.g, values: self.values.iter().map(|&a| f(a)).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Spectral `∂_θ` of the grid interpolant.
    pub fn d_theta(&self) -> Self {
        self.spectral(|_, j| Complex64::new(0.0, j as f64))
    }

    /// Spectral `ω·∂_φ` of the grid interpolant.
    pub fn d_phi(&self, omega: &[f64]) -> Self {
        self.spectral(|l, _| Complex64::new(0.0, dot(omega, l)))
    }

    fn spectral(&self, m: impl Fn(&[i64], i64) -> Complex64) -> Self {
        let g = self.g;
        let mut buf: Vec<Complex64> = self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_nd(&mut buf, self.d + 1, g, false);
        let n = buf.len();
        for (i, z) in buf.iter_mut().enumerate() {
            let mut idx = i;
            let mut k = vec![0i64; self.d + 1];
            let mut nyquist = false;
            for slot in k.iter_mut().rev() {
                let w = idx % g;
                idx /= g;
                nyquist |= 2 * w == g;
                *slot = crate::fourier::wavenumber(w, g);
            }
            let j = k.pop().expect("θ index");
            *z = if nyquist { Complex64::new(0.0, 0.0) } else { *z * m(&k, j) / n as f64 };
        }
        fft_nd(&mut buf, self.d + 1, g, true);
        TorusGrid { d: self.d, g, values: buf.iter().map(|z| z.re).collect() }
    }
}

/// In-place unnormalized FFT over `dims` axes of length `g` each.
pub fn fft_nd(buf: &mut [Complex64], dims: usize, g: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let plan = if inverse { planner.plan_fft_inverse(g) } else { planner.plan_fft_forward(g) };
    let n = buf.len();
    let mut line = vec![Complex64::new(0.0, 0.0); g];
    for axis in 0..dims {
        let stride = g.pow((dims - 1 - axis) as u32);
        let block = stride * g;
        for start in (0..n).step_by(block) {
            for off in 0..stride {
                for (k, slot) in line.iter_mut().enumerate() {
                    *slot = buf[start + off + k * stride];
                }
                plan.process(&mut line);
                for (k, v) in line.iter().enumerate() {
                    buf[start + off + k * stride] = *v;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(d: usize) -> TorusFunction {
        let mut f = TorusFunction::zero(d, 4);
        let l1 = vec![1; d];
        f.set_pair(&l1, -2, Complex64::new(0.3, 0.1));
        f.set_pair(&vec![0; d], 3, Complex64::new(-0.2, 0.0));
        f.set_pair(&vec![0; d], 0, Complex64::new(0.05, 0.0));
        f
    }

    #[test]
    fn single_pair_norm() {
        let mut f = TorusFunction::zero(1, 8);
        f.set_pair(&[2], -3, Complex64::new(0.5, 0.0));
        let s = 1.5;
        assert!((f.sobolev_norm(s) - 2f64.sqrt() * 3f64.powf(s) * 0.5).abs() < 1e-14);
        assert_eq!(TorusFunction::zero(1, 8).sobolev_norm(2.0), 0.0);
        let l2: f64 = f.modes().map(|(_, _, c)| c.norm_sqr()).sum::<f64>().sqrt();
        assert!((f.sobolev_norm(0.0) - l2).abs() < 1e-15);
    }

    #[test]
    fn grid_round_trip() {
        for d in [1, 2] {
            let f = sample(d);
            let g = f.to_grid(16);
            let back = TorusFunction::from_grid(&g, 4);
            assert!(back.axpy(-1.0, &f).max_coeff() < 1e-15);
            assert!(f.reality_defect() == 0.0);
        }
    }

    #[test]
    fn grid_derivatives_match_spectral() {
        let f = sample(2);
        let om = [0.7, -1.3];
        let a = TorusFunction::from_grid(&f.to_grid(16).d_phi(&om), 4);
        assert!(a.axpy(-1.0, &f.d_phi(&om)).max_coeff() < 1e-14);
        let b = TorusFunction::from_grid(&f.to_grid(16).d_theta(), 4);
        assert!(b.axpy(-1.0, &f.d_theta()).max_coeff() < 1e-14);
    }

    #[test]
    fn projectors_split() {
        let f = sample(1);
        let s = f.project(2).axpy(1.0, &f.project_perp(2));
        assert_eq!(s, f);
        assert_eq!(f.project(2).get(&[0], 3), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn grid_pointwise_value() {
        let f = sample(1);
        let g = f.to_grid(16);
        let (r, c) = (3usize, 5usize);
        let phi = 2.0 * std::f64::consts::PI * r as f64 / 16.0;
        let th = 2.0 * std::f64::consts::PI * c as f64 / 16.0;
        let exact: f64 = f.modes().map(|(l, j, z)| (z * Complex64::from_polar(1.0, l[0] as f64 * phi + j as f64 * th)).re).sum();
        assert!((g.values[r * 16 + c] - exact).abs() < 1e-15);
        assert_eq!(g.row_phi(r), vec![phi]);
    }
}
