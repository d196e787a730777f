//! Zero-order remainder of the linearized contour operator around a travelling
//! torus `r(φ, θ) = ε cos(nθ − φ)`, after the transport part has been reduced.
//!
//! On every slice `φ_p` the operator
//! `ρ ↦ ∂_θ(f_n ρ) − ∂_θ(𝒞⁻¹ L_r 𝓑ρ − L_0 ρ)` is applied to `e^{ij₀θ}`, where
//! `𝓑ρ = (1+∂_θβ)ρ(θ+β)` and `𝒞⁻¹w(y) = w(θ(y))` undo the straightening. The
//! entries are then transformed in `φ`.

use super::toeplitz::normal_modes;
use super::{
    conjugated_coefficient, invert_shift, transport_kam_run, DiagonalSpectrum, KamError, TorusFunction,
    TorusGrid, ToeplitzOperator, TransportStep,
};
use crate::bessel::product_ik;
use crate::cantor::DiophantineParams;
use crate::contour::{matvec, v_from_kernel, Contour, FourierCurve};
use crate::fourier::{eval_spectrum, spectrum};
use crate::par::{map_range, Exec};
use crate::spectrum::{frequency_vector, v0, SpectrumContext};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourRemainderSetup {
    pub lambda: f64,
    /// Rotation `Ω` of the frame.
    pub omega: f64,
    pub eps: f64,
    /// Excited site `n`; the tangential set is `{n}`.
    pub site: u32,
    pub jmax: u32,
    pub lcap: usize,
    /// Points per angle, for both `φ` and `θ`.
    pub grid: usize,
    pub transport_steps: usize,
    pub dio: DiophantineParams,
}

impl Default for ContourRemainderSetup {
    fn default() -> Self {
        ContourRemainderSetup {
            lambda: 1.0,
            omega: 0.5,
            eps: 1e-3,
            site: 2,
            jmax: 16,
            lcap: 8,
            grid: 64,
            transport_steps: 4,
            dio: DiophantineParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContourRemainder {
    pub frequencies: Vec<f64>,
    pub v0: f64,
    /// Straightened transport coefficient, including the mean of the last residual.
    pub c: f64,
    pub mu0: DiagonalSpectrum,
    pub r0: ToeplitzOperator,
    pub transport: Vec<TransportStep>,
    /// `max |f_n|` left after the transport steps.
    pub transport_residual: f64,
    /// Defects of the raw entries before projection onto the reversible structure.
    pub reality_defect: f64,
    pub reversibility_defect: f64,
}

fn slice_curve(s: &ContourRemainderSetup, phi: f64) -> Result<FourierCurve, KamError> {
    let a = Complex64::from_polar(0.5 * s.eps, -phi);
    FourierCurve::from_modes(s.grid, &[(s.site as usize, a)]).map_err(|e| KamError::Contour(e.into()))
}

/// Build `(μ⁰, ℛ₀)` for the contour operator at the torus `ε cos(nθ − φ)`.
pub fn contour_remainder(s: &ContourRemainderSetup) -> Result<ContourRemainder, KamError> {
    let g = s.grid;
    if g % 4 != 0 || g < 16 {
        return Err(KamError::Config(format!("grid {g} must be a multiple of 4 and at least 16")));
    }
    if 2 * s.jmax as usize + 1 >= g {
        return Err(KamError::Config(format!("jmax {} not resolved on {g} points", s.jmax)));
    }
    let ctx = SpectrumContext::new(s.lambda, s.omega, vec![s.site]).map_err(|e| KamError::Config(e.to_string()))?;
    let freqs = frequency_vector(&ctx);
    let base_v = v0(&ctx);
    let contour = Contour::new(s.lambda, g)?.with_exec(Exec::Sequential);
    let phis: Vec<f64> = (0..g).map(|p| 2.0 * PI * p as f64 / g as f64).collect();

    let kernels: Vec<Result<(Vec<f64>, Vec<f64>), KamError>> = map_range(Exec::default(), g, |p| {
        let r = slice_curve(s, phis[p])?;
        let (geo, k) = contour.kernel(&r)?;
        Ok((v_from_kernel(&geo, &k, s.omega), k))
    });
    let mut vr = Vec::with_capacity(g * g);
    let mut ks = Vec::with_capacity(g);
    for item in kernels {
        let (v, k) = item?;
        vr.extend(v);
        ks.push(k);
    }
    let a0 = TorusGrid { d: 1, g, values: vr };
    let cap = g / 4;
    let f0 = TorusFunction::from_grid(&a0.map(|x| x - base_v), cap);
    let rep = transport_kam_run(&f0, base_v, &freqs, &s.dio, s.transport_steps)?;
    let beta = &rep.beta_grid;
    let coef = conjugated_coefficient(&a0, beta, &freqs)?;
    let mean = coef.values.iter().sum::<f64>() / coef.values.len() as f64;
    let fres = coef.map(|x| x - mean);
    let c = mean;
    let beta_hat = invert_shift(beta)?;
    let dbeta = beta.d_theta();

    let modes = normal_modes(&[s.site], s.jmax);
    let theta: Vec<f64> = phis.clone();
    // Per slice: matrix A[j][j0] of Fourier coefficients, before the φ transform.
    let slices: Vec<Vec<Complex64>> = map_range(Exec::default(), g, |p| {
        let row = |u: &TorusGrid| u.values[p * g..(p + 1) * g].to_vec();
        let (b, db, bh, fr) = (row(beta), row(&dbeta), row(&beta_hat), row(&fres));
        let k = &ks[p];
        let n = modes.len();
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for (ci, &j0) in modes.iter().enumerate() {
            let ik = product_ik(j0.unsigned_abs() as u32, s.lambda);
            let parts: Vec<Vec<Complex64>> = [0.0, -0.5 * PI]
                .iter()
                .map(|&shift| {
                    let e = |t: f64| (j0 as f64 * t + shift).cos();
                    let pushed: Vec<f64> = (0..g).map(|m| (1.0 + db[m]) * e(theta[m] + b[m])).collect();
                    let lr = spectrum(&matvec(k, &pushed));
                    let x: Vec<f64> = (0..g)
                        .map(|m| fr[m] * e(theta[m]) - eval_spectrum(&lr, theta[m] + bh[m]) + ik * e(theta[m]))
                        .collect();
                    spectrum(&x)
                })
                .collect();
            for (ri, &j) in modes.iter().enumerate() {
                let slot = j.rem_euclid(g as i64) as usize;
                let coeff = parts[0][slot] + Complex64::new(0.0, 1.0) * parts[1][slot];
                out[ri * n + ci] = Complex64::new(0.0, j as f64) * coeff;
            }
        }
        out
    });

    let mut raw = ToeplitzOperator::zero(1, s.lcap, modes.clone());
    let n = modes.len();
    for l in -(s.lcap as i64)..=s.lcap as i64 {
        for (ri, &j) in modes.iter().enumerate() {
            for (ci, &j0) in modes.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (p, sl) in slices.iter().enumerate() {
                    acc += sl[ri * n + ci] * Complex64::from_polar(1.0, -(l as f64) * phis[p]);
                }
                raw.set(&[l], j, j0, acc / g as f64);
            }
        }
    }
    let reality_defect = raw
        .entries()
        .map(|(l, j, j0, v)| (raw.get(&[-l[0]], -j, -j0) - v.conj()).norm())
        .fold(0.0, f64::max);
    let reversibility_defect = raw.symmetry_defect(-1.0);
    let r0 = raw.symmetrized(-1.0).map_entries(|_, _, _, v| Complex64::new(0.0, v.im));
    Ok(ContourRemainder {
        frequencies: freqs,
        v0: base_v,
        c,
        mu0: DiagonalSpectrum::from_transport(&ctx, &modes, c),
        r0,
        transport: rep.steps,
        transport_residual: fres.max_abs(),
        reality_defect,
        reversibility_defect,
    })
}
