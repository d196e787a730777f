//! Desk-scale acceptance checks. Runs as a plain binary so that the verdict
//! lines always reach the console.
//!
//! Criteria 3 and 8 are known to fail as stated; they are run and reported like
//! the others but do not fail the binary.

use num_complex::Complex64;
use qgsw_patch::bessel::oracle::{laplace_product, nicholson_product, series_product_dd};
use qgsw_patch::bessel::product_ik;
use qgsw_patch::cantor::{first_melnikov_ok, resonant_complement_measure, russmann_check, DiophantineParams, MeasureSetup};
use qgsw_patch::contour::{Contour, FourierCurve};
use qgsw_patch::dynamics::{evolve, integrate, reversibility_check, EvolutionConfig};
use qgsw_patch::fourier;
use qgsw_patch::kam::{
    contour_remainder, homological_residual, manufactured_perturbation, remainder_kam_run, solve_transport_homological,
    transport_kam_run, ContourRemainderSetup, TorusFunction,
};
use qgsw_patch::par::Exec;
use qgsw_patch::spectrum::{
    asymptotic_residual, determinant, frequency_vector, lattice_ball, nondegeneracy_det, nondegeneracy_matrix, omega_j,
    v0, SpectrumContext,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

const KNOWN_FAILURES: [usize; 2] = [3, 8];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn max(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

fn random_curve(rng: &mut ChaCha8Rng, grid: usize, top: usize) -> FourierCurve {
    let modes: Vec<(usize, Complex64)> = (1..=top)
        .map(|j| {
            let s = 1.0 / (j * j) as f64;
            (j, Complex64::new(rng.gen_range(-1.0..1.0) * s, rng.gen_range(-1.0..1.0) * s))
        })
        .collect();
    FourierCurve::from_modes(grid, &modes).unwrap()
}

fn c1_bessel_oracles() -> Verdict {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for &l in &[0.1, 0.5, 1.0, 2.0, 5.0, 10.0] {
        for j in 1..=20 {
            let s = series_product_dd(j, l);
            let n = nicholson_product(j, l, 1.0 / 64.0);
            let p = laplace_product(j, l, 0);
            worst = worst.max(max([(s - n).abs(), (s - p).abs(), (n - p).abs()]) / s);
        }
    }
    let secs = t.elapsed().as_secs_f64();
    verdict(worst <= 1e-10 && secs < 5.0, format!("max pairwise rel gap {worst:.2e}, {secs:.2} s"))
}

fn c2_small_lambda() -> Verdict {
    let worst = max((1..=10).map(|j| (product_ik(j, 1e-5) - 0.5 / j as f64).abs()));
    verdict(worst <= 1e-4, format!("max |I_jK_j(1e-5) - 1/(2j)| = {worst:.2e}"))
}

fn c3_asymptotics() -> Verdict {
    let t = Instant::now();
    let ctx = SpectrumContext::new(1.0, 0.5, vec![1]).unwrap();
    let rows = asymptotic_residual(&ctx, 20..=200);
    let sup = |lo: u32, hi: u32| max(rows.iter().filter(|r| r.j >= lo && r.j <= hi).map(|r| r.scaled.abs()));
    let (all, low, high) = (sup(20, 200), sup(20, 40), sup(100, 200));
    let secs = t.elapsed().as_secs_f64();
    verdict(
        all.is_finite() && all < 1.0 && high <= low && secs < 2.0,
        format!("sup j^4|res| on [20,200] {all:.6}, [20,40] {low:.6}, [100,200] {high:.6}, {secs:.2} s"),
    )
}

fn c4_monotone() -> Verdict {
    let mut violations = 0;
    for &l in &[0.5, 1.0, 2.0] {
        let ctx = SpectrumContext::new(l, 0.5, vec![1]).unwrap();
        let r: Vec<f64> = (1..=200).map(|j| omega_j(&ctx, j) / j as f64).collect();
        violations += r.windows(2).filter(|w| w[1] <= w[0]).count();
    }
    verdict(violations == 0, format!("{violations} violations"))
}

fn c5_nondegeneracy() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let size = rng.gen_range(1..=5);
        let mut sites: Vec<u32> = Vec::new();
        while sites.len() < size {
            let s = rng.gen_range(1..=12);
            if !sites.contains(&s) {
                sites.push(s);
            }
        }
        sites.sort_unstable();
        let closed = nondegeneracy_det(&sites);
        worst = worst.max((determinant(nondegeneracy_matrix(&sites)) - closed).abs() / closed.abs());
    }
    verdict(worst <= 1e-10, format!("max rel gap {worst:.2e} over 200 sets"))
}

fn c6_equilibrium() -> Verdict {
    let c = Contour::new(1.0, 256).unwrap();
    let f = c.f_lambda_grid(&FourierCurve::zero(256)).unwrap();
    let m = max(f.iter().map(|x| x.abs()));
    verdict(m <= 1e-12, format!("|F[0]|_inf = {m:.2e}"))
}

fn c7_linearization() -> Verdict {
    let m = 128;
    let c = Contour::new(1.0, m).unwrap();
    let r = FourierCurve::cosines(m, &[(1, 0.05), (3, 0.025)]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let eps = [1e-2, 1e-3, 1e-4];
    let mut worst = f64::INFINITY;
    for _ in 0..20 {
        let rho = random_curve(&mut rng, m, 8);
        let lin = c.linearized_apply(&r, 0.5, &rho).unwrap();
        let errs: Vec<f64> = eps
            .iter()
            .map(|&e| {
                let p = c.rhs(&r.axpy(e, &rho), 0.5).unwrap();
                let q = c.rhs(&r.axpy(-e, &rho), 0.5).unwrap();
                p.axpy(-1.0, &q).scale(0.5 / e).axpy(-1.0, &lin).max_abs() / lin.max_abs()
            })
            .collect();
        for k in 0..2 {
            worst = worst.min((errs[k] / errs[k + 1]).log10());
        }
    }
    verdict(worst >= 1.8, format!("min observed order {worst:.3} over 20 directions"))
}

fn c8_energy_gradient() -> Verdict {
    let m = 64;
    let c = Contour::new(1.0, m).unwrap();
    let r = FourierCurve::from_modes(
        m,
        &[(1, Complex64::new(0.02, 0.01)), (2, Complex64::new(-0.015, 0.0)), (3, Complex64::new(0.0, 0.01))],
    )
    .unwrap();
    let f = c.f_lambda_grid(&r).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let h = 1e-5;
    let (mut stated, mut flipped): (f64, f64) = (0.0, 0.0);
    for _ in 0..20 {
        let chi = random_curve(&mut rng, m, 8);
        let dir = chi.derivative();
        // ⟨∂_θ∇E, χ⟩ = -dE[∂_θχ].
        let weak = -(c.energy(&r.axpy(h, &dir)).unwrap() - c.energy(&r.axpy(-h, &dir)).unwrap()) / (2.0 * h);
        let target = -2.0 * fourier::inner(&f, &chi.to_grid());
        stated = stated.max((weak - target).abs() / target.abs());
        flipped = flipped.max((weak + target).abs() / target.abs());
    }
    verdict(
        stated <= 1e-3,
        format!("max rel error {stated:.2e} for ∂θ∇E = -2F; {flipped:.2e} for ∂θ∇E = +2F"),
    )
}

fn c9_conservation() -> Verdict {
    let t = Instant::now();
    let m = 64;
    let c = Contour::new(1.0, m).unwrap();
    let r0 = FourierCurve::cosines(m, &[(3, 1e-3)]).unwrap();
    let mut cfg = EvolutionConfig::new(1e-3, 1.0);
    cfg.record_every = 10;
    let tr = evolve(&c, &r0, 0.5, &cfg).unwrap();
    let rep = tr.report;
    let finals: Vec<FourierCurve> =
        [1e-3, 5e-4, 2.5e-4].iter().map(|&dt| integrate(&c, &r0, 0.5, &EvolutionConfig::new(dt, 1.0)).unwrap()).collect();
    let d1 = finals[0].axpy(-1.0, &finals[1]).max_abs();
    let d2 = finals[1].axpy(-1.0, &finals[2]).max_abs();
    let ratio = d1 / d2;
    let secs = t.elapsed().as_secs_f64();
    verdict(
        rep.drift_e <= 1e-8 && rep.drift_j <= 1e-8 && rep.drift_mean <= 1e-13 && (12.0..=20.0).contains(&ratio) && secs < 60.0,
        format!(
            "drift E {:.1e}, J {:.1e}, |mean| {:.1e}, Richardson ratio {ratio:.2}, {secs:.1} s",
            rep.drift_e, rep.drift_j, rep.drift_mean
        ),
    )
}

fn c10_reversibility() -> Verdict {
    let m = 64;
    let c = Contour::new(1.0, m).unwrap();
    let r0 = FourierCurve::cosines(m, &[(2, 1e-4), (3, -5e-5), (5, 2e-5)]).unwrap();
    let d = reversibility_check(&c, &r0, 0.5, &EvolutionConfig::new(1e-2, 1.0)).unwrap();
    verdict(d <= 1e-8, format!("forward/reflected-backward defect {d:.2e}"))
}

fn c11_transport_residual() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 16;
    let (mut accepted, mut drawn) = (0, 0);
    let mut worst: f64 = 0.0;
    let mut clipped = 0;
    let divisors: Vec<(i64, i64)> = lattice_ball(2, n as u32)
        .into_iter()
        .map(|v| (v[0], v[1]))
        .filter(|&(l, j)| (l, j) != (0, 0))
        .collect();
    while accepted < 50 && drawn < 100_000 {
        drawn += 1;
        let lambda = rng.gen_range(0.5..2.0);
        let omega = rng.gen_range(0.25..1.0);
        // With υ = 1/4 the membership threshold scales as γ^{1/4}; γ is log-uniform.
        let dio = DiophantineParams { gamma: 10f64.powf(rng.gen_range(-12.0..-6.0)), ..Default::default() };
        let ctx = SpectrumContext::new(lambda, omega, vec![2]).unwrap();
        let w = frequency_vector(&ctx);
        let v = v0(&ctx);
        if !divisors.iter().all(|&(l, j)| first_melnikov_ok(&w, v, &[l], j, &dio)) {
            continue;
        }
        accepted += 1;
        let mut f = TorusFunction::zero(1, n);
        for (l, j, _) in TorusFunction::zero(1, n).modes() {
            let s = (-0.3 * (l[0].abs() + j.abs()) as f64).exp() * 1e-3;
            f.set_pair(&l, j, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * s);
        }
        let sol = solve_transport_homological(v, &f, &w, n, &dio);
        clipped += sol.clipped.len();
        let res = homological_residual(v, &f, &sol.g, &w, n);
        let on = res
            .modes()
            .filter(|(l, j, _)| !sol.clipped.iter().any(|(cl, cj)| cl == l && cj == j))
            .map(|(_, _, c)| c.norm());
        worst = worst.max(max(on));
    }
    verdict(
        accepted == 50 && worst <= 1e-12 && clipped == 0,
        format!("max residual {worst:.2e} on {accepted} accepted points ({drawn} drawn), {clipped} clipped modes"),
    )
}

fn c12_transport_kam() -> Verdict {
    let ctx = SpectrumContext::new(1.0, 0.5, vec![2]).unwrap();
    let dio = DiophantineParams { n0: 4, ..Default::default() };
    let f0 = manufactured_perturbation(1, 16, 1.0, 1e-3, dio.gamma);
    let rep = transport_kam_run(&f0, v0(&ctx), &frequency_vector(&ctx), &dio, 4).unwrap();
    let d: Vec<f64> = std::iter::once(rep.initial_delta.0).chain(rep.steps.iter().map(|s| s.delta_s0)).collect();
    let decreasing = d.windows(2).all(|w| w[1] < w[0]);
    let superlinear = d[3] / d[2] < d[1] / d[0];
    let res: Vec<f64> = rep.steps.iter().map(|s| s.conjugation_residual).collect();
    let monotone = res.windows(2).all(|w| w[1] <= w[0]);
    verdict(
        decreasing && superlinear && monotone,
        format!("delta_s0 {:?}; conjugation residual {:?}", fmt(&d), fmt(&res)),
    )
}

fn fmt(v: &[f64]) -> Vec<String> {
    v.iter().map(|x| format!("{x:.2e}")).collect()
}

fn c13_remainder_kam() -> Verdict {
    let setup = ContourRemainderSetup::default();
    let cr = contour_remainder(&setup).unwrap();
    let rep = remainder_kam_run(&cr.mu0, &cr.r0, &cr.frequencies, &setup.dio, 3).unwrap();
    let last = rep.steps.last().unwrap().offdiag_s0;
    let reduction = rep.initial_offdiag_s0 / last;
    let rev = rep.mu_inf.reversibility_defect();
    let mut jr: Vec<f64> = rep.r_inf().iter().map(|&(j, r)| (j as f64 * r).abs()).collect();
    let peak = max(jr.iter().cloned());
    jr.sort_by(f64::total_cmp);
    let median = 0.5 * (jr[(jr.len() - 1) / 2] + jr[jr.len() / 2]);
    verdict(
        reduction >= 1e3 && rev <= 1e-12 && peak <= 10.0 * median,
        format!(
            "off-diagonal {:.2e} -> {last:.2e} (x{reduction:.1e}), mu reversibility {rev:.1e}, max |j r_j| / median = {:.2}",
            rep.initial_offdiag_s0,
            peak / median
        ),
    )
}

fn c14_cantor() -> Verdict {
    let t = Instant::now();
    let setup = MeasureSetup {
        lambda_lo: 0.5,
        lambda_hi: 2.0,
        omega: 0.5,
        sites: vec![2, 3],
        tau1: 3.0,
        lmax: 8,
        grid: 20_000,
        gammas: vec![1e-2, 1e-3, 1e-4, 1e-5],
    };
    let rep = resonant_complement_measure(&setup, Exec::default()).unwrap();
    let nonincreasing = rep.complement_measure.windows(2).all(|w| w[1] <= w[0]);
    let slope = rep.fitted_exponent.unwrap_or(f64::NAN);
    let mut empty = true;
    for site in [2, 5] {
        let one = MeasureSetup { sites: vec![site], gammas: vec![0.49, 0.1, 1e-3], ..setup.clone() };
        let r = resonant_complement_measure(&one, Exec::default()).unwrap();
        empty &= r.complement_measure.iter().all(|&m| m == 0.0) && r.intervals.iter().all(|v| v.is_empty());
    }
    let secs = t.elapsed().as_secs_f64();
    verdict(
        nonincreasing && slope > 0.0 && empty && secs < 120.0,
        format!("measures {:?}, slope {slope:.4}, d = 1 empty: {empty}, {secs:.1} s", fmt(&rep.complement_measure)),
    )
}

fn c15_russmann() -> Verdict {
    let f = |x: f64| x * x;
    let df = |x: f64| 2.0 * x;
    let d2f = |_: f64| 2.0;
    let alphas = [1e-6, 1e-4, 1e-2];
    let rep = russmann_check(&[&f, &df, &d2f], (-1.0, 1.0), 4001, &alphas, 1.0).unwrap();
    let worst = max(rep.measures.iter().zip(&alphas).map(|(m, a)| (m / (2.0 * a.sqrt()) - 1.0).abs()));
    verdict(worst <= 1e-6, format!("max rel error vs 2 sqrt(alpha) {worst:.2e}"))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 15] = [
        ("Bessel cross-validation", c1_bessel_oracles),
        ("small-lambda law", c2_small_lambda),
        ("spectrum asymptotics", c3_asymptotics),
        ("monotone Omega_j/j", c4_monotone),
        ("non-degeneracy determinant", c5_nondegeneracy),
        ("equilibrium functional", c6_equilibrium),
        ("linearization order", c7_linearization),
        ("Hamiltonian gradient", c8_energy_gradient),
        ("conservation and order", c9_conservation),
        ("reversibility", c10_reversibility),
        ("transport homological residual", c11_transport_residual),
        ("transport KAM decay", c12_transport_kam),
        ("remainder KAM", c13_remainder_kam),
        ("Cantor measure", c14_cantor),
        ("sublevel measure of x^2", c15_russmann),
    ];
    let mut unexpected = Vec::new();
    for (k, (name, check)) in criteria.iter().enumerate() {
        let id = k + 1;
        let t = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| verdict(false, "panicked".into()));
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {id:>2} {name}: {} ({:.2} s)", v.detail, t.elapsed().as_secs_f64());
        if !v.pass && !KNOWN_FAILURES.contains(&id) {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
