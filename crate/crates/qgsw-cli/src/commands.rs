//! One function per subcommand. Each validates its flags, runs the library
//! routine and hands rows or reports to [`Outputs`].

use crate::io::Cell;
use crate::{
    BesselArgs, CantorArgs, CliError, EvolveArgs, LinearizeArgs, Outputs, RemainderArgs, SelftestArgs, SpectrumArgs,
    TransportArgs,
};
use num_complex::Complex64;
use qgsw_patch::bessel::oracle::{laplace_product, nicholson_product, series_product_dd};
use qgsw_patch::bessel::product_ik;
use qgsw_patch::cantor::{resonant_complement_measure, russmann_check, DiophantineParams, MeasureSetup};
use qgsw_patch::contour::{Contour, FourierCurve};
use qgsw_patch::dynamics::{evolve as run_evolution, ConservationReport, EvolutionConfig};
use qgsw_patch::kam::{
    contour_remainder, homological_residual, manufactured_perturbation, remainder_kam_run, solve_transport_homological,
    transport_kam_run, ContourRemainderSetup, RemainderReport, TorusFunction, TransportStep,
};
use qgsw_patch::par::Exec;
use qgsw_patch::spectrum::{
    asymptotic_residual, determinant, frequency_vector, nondegeneracy_det, nondegeneracy_matrix, omega_j, v0,
    SpectrumContext,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

fn require(ok: bool, msg: impl FnOnce() -> String) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Validation(msg()))
    }
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    require(v > 0.0 && v.is_finite(), || format!("--{name} must be positive and finite, got {v}"))
}

pub fn spectrum(a: &SpectrumArgs, out: &mut Outputs) -> Result<(), CliError> {
    require(a.jmax >= 1, || "--jmax must be at least 1".into())?;
    let ctx = SpectrumContext::new(a.lambda, a.omega, vec![1])?;
    let rows: Vec<Vec<Cell>> = asymptotic_residual(&ctx, 1..=a.jmax)
        .into_iter()
        .map(|r| vec![Cell::Int(r.j as i64), r.omega_j.into(), r.residual.into(), r.scaled.into()])
        .collect();
    out.csv("spectrum.csv", &["j", "omega_j", "residual", "residual_j4"], &rows)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ConservationFile {
    pub steps: usize,
    pub dt: f64,
    pub t_end: f64,
    pub drift_e: f64,
    pub drift_j: f64,
    pub drift_mean: f64,
}

pub fn evolve(a: &EvolveArgs, out: &mut Outputs) -> Result<(), CliError> {
    positive("lambda", a.lambda)?;
    positive("omega", a.omega)?;
    let r0 = match &a.init {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
            let c = FourierCurve::from_json(&text).map_err(|e| CliError::Validation(e.to_string()))?;
            if c.grid_size == a.grid {
                c
            } else {
                c.regrid(a.grid)
            }
        }
        None => FourierCurve::cosines(a.grid, &[(a.mode, a.amp)]).map_err(|e| CliError::Validation(e.to_string()))?,
    };
    let contour = Contour::new(a.lambda, a.grid)?;
    let mut cfg = EvolutionConfig::new(a.dt, a.t_end);
    cfg.record_every = a.record_every;
    let traj = run_evolution(&contour, &r0, a.omega, &cfg)?;
    let rows: Vec<Vec<Cell>> = traj
        .diagnostics
        .iter()
        .map(|d| vec![d.t.into(), d.energy.into(), d.impulse.into(), d.mean.into()])
        .collect();
    out.csv("trajectory.csv", &["t", "E", "J", "mean"], &rows)?;
    for (k, (_, c)) in traj.snapshots.iter().enumerate() {
        out_curve(out, &format!("curve-{k:05}.json"), c)?;
    }
    out_curve(out, "curve-final.json", traj.last())?;
    let (steps, dt) = cfg.steps();
    let ConservationReport { drift_e, drift_j, drift_mean, .. } = traj.report;
    out.json("conservation.json", &ConservationFile { steps, dt, t_end: a.t_end, drift_e, drift_j, drift_mean })
}

fn out_curve(out: &mut Outputs, name: &str, c: &FourierCurve) -> Result<(), CliError> {
    let value: serde_json::Value = serde_json::from_str(&c.to_json()).expect("curve JSON");
    out.json(name, &value)
}

/// Smooth random direction with coefficients of size `1/j²` on modes `1..=8`.
pub fn random_direction(rng: &mut ChaCha8Rng, grid: usize) -> FourierCurve {
    let top = 8.min(grid / 2 - 2);
    let modes: Vec<(usize, Complex64)> = (1..=top)
        .map(|j| {
            let s = 1.0 / (j * j) as f64;
            (j, Complex64::new(rng.gen_range(-1.0..1.0) * s, rng.gen_range(-1.0..1.0) * s))
        })
        .collect();
    FourierCurve::from_modes(grid, &modes).expect("resolved modes")
}

#[derive(Debug, Serialize, Deserialize)]
pub struct LinearizeSummary {
    pub eps: Vec<f64>,
    pub directions: usize,
    pub min_order: f64,
    pub median_order: f64,
    pub max_error: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Relative errors of the central difference of the right-hand side against
/// `linearized_apply`, one row per direction and step.
pub fn linearization_errors(
    contour: &Contour,
    r: &FourierCurve,
    omega: f64,
    dirs: &[FourierCurve],
    eps: &[f64],
) -> Result<Vec<Vec<f64>>, CliError> {
    let mut out = Vec::with_capacity(dirs.len());
    for rho in dirs {
        let lin = contour.linearized_apply(r, omega, rho)?;
        let scale = lin.max_abs();
        let mut errs = Vec::with_capacity(eps.len());
        for &e in eps {
            let plus = contour.rhs(&r.axpy(e, rho), omega)?;
            let minus = contour.rhs(&r.axpy(-e, rho), omega)?;
            let fd = plus.axpy(-1.0, &minus).scale(0.5 / e);
            errs.push(fd.axpy(-1.0, &lin).max_abs() / scale);
        }
        out.push(errs);
    }
    Ok(out)
}

/// Observed orders `log(e_k/e_{k+1}) / log(ε_k/ε_{k+1})`.
pub fn observed_orders(eps: &[f64], errs: &[f64]) -> Vec<f64> {
    (0..eps.len() - 1).map(|k| (errs[k] / errs[k + 1]).ln() / (eps[k] / eps[k + 1]).ln()).collect()
}

pub fn linearize_check(a: &LinearizeArgs, out: &mut Outputs) -> Result<(), CliError> {
    require(a.eps.len() >= 2, || "--eps needs at least two steps".into())?;
    require(a.eps.windows(2).all(|w| w[0] > w[1] && w[1] > 0.0), || "--eps must be positive and decreasing".into())?;
    require(a.directions >= 1, || "--directions must be at least 1".into())?;
    positive("omega", a.omega)?;
    let contour = Contour::new(a.lambda, a.grid)?;
    let r = FourierCurve::cosines(a.grid, &[(1, a.amp), (3, 0.5 * a.amp)]).map_err(|e| CliError::Validation(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.common.seed);
    let dirs: Vec<FourierCurve> = (0..a.directions).map(|_| random_direction(&mut rng, a.grid)).collect();
    let errs = linearization_errors(&contour, &r, a.omega, &dirs, &a.eps)?;
    let mut rows = Vec::new();
    let mut orders = Vec::new();
    for (k, e) in errs.iter().enumerate() {
        for (eps, err) in a.eps.iter().zip(e) {
            rows.push(vec![Cell::Int(k as i64), (*eps).into(), (*err).into()]);
        }
        orders.extend(observed_orders(&a.eps, e));
    }
    out.csv("linearize.csv", &["direction", "eps", "rel_error"], &rows)?;
    let mut sorted = orders.clone();
    sorted.sort_by(f64::total_cmp);
    let min_order = sorted[0];
    let summary = LinearizeSummary {
        eps: a.eps.clone(),
        directions: a.directions,
        min_order,
        median_order: sorted[sorted.len() / 2],
        max_error: errs.iter().flatten().cloned().fold(0.0, f64::max),
        threshold: a.min_order,
        pass: min_order >= a.min_order,
    };
    out.json("linearize.json", &summary)?;
    if summary.pass {
        Ok(())
    } else {
        Err(CliError::Failure(format!("observed order {min_order:.3} below {}", a.min_order)))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeEntry {
    pub l: Vec<i64>,
    pub j: i64,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TransportFile {
    pub d: usize,
    pub cap: usize,
    pub frequencies: Vec<f64>,
    pub v0: f64,
    pub c: f64,
    pub initial_delta_s0: f64,
    pub initial_delta_shigh: f64,
    pub mean_sum: f64,
    pub steps: Vec<TransportStep>,
    pub beta: Vec<ModeEntry>,
}

fn mode_entries(f: &TorusFunction) -> Vec<ModeEntry> {
    f.modes().filter(|(_, _, c)| c.norm() > 0.0).map(|(l, j, c)| ModeEntry { l, j, re: c.re, im: c.im }).collect()
}

fn validated_dio(dio: DiophantineParams, d: usize) -> Result<DiophantineParams, CliError> {
    dio.validate(d)?;
    Ok(dio)
}

pub fn kam_transport(a: &TransportArgs, out: &mut Outputs) -> Result<(), CliError> {
    require(a.d >= 1 && a.d <= 3, || format!("--d must be 1, 2 or 3, got {}", a.d))?;
    positive("delta0", a.delta0)?;
    positive("sigma", a.sigma)?;
    let sites = a.sites.clone().unwrap_or_else(|| (2..2 + a.d as u32).collect());
    require(sites.len() == a.d, || format!("--sites has {} entries, --d is {}", sites.len(), a.d))?;
    let cap = a.cap.unwrap_or(if a.d == 1 { 16 } else { 8 });
    require((4..=64).contains(&cap), || format!("--cap must lie in 4..=64, got {cap}"))?;
    let dio = validated_dio(a.dio.params(), a.d)?;
    let ctx = SpectrumContext::new(a.lambda, a.omega, sites)?;
    let omega = frequency_vector(&ctx);
    let base = v0(&ctx);
    let f0 = manufactured_perturbation(a.d, cap, a.sigma, a.delta0, dio.gamma);
    let mut rep = transport_kam_run(&f0, base, &omega, &dio, a.steps)?;
    if !a.common.timing {
        rep.steps.iter_mut().for_each(|s| s.wallclock = 0.0);
    }
    let file = TransportFile {
        d: a.d,
        cap,
        frequencies: omega,
        v0: rep.v0,
        c: rep.c,
        initial_delta_s0: rep.initial_delta.0,
        initial_delta_shigh: rep.initial_delta.1,
        mean_sum: rep.mean_sum,
        steps: rep.steps,
        beta: mode_entries(&rep.beta),
    };
    out.json("transport-report.json", &file)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RemainderFile {
    pub setup: ContourRemainderSetup,
    pub frequencies: Vec<f64>,
    pub v0: f64,
    pub c: f64,
    pub transport: Vec<TransportStep>,
    pub transport_residual: f64,
    pub raw_reality_defect: f64,
    pub raw_reversibility_defect: f64,
    pub report: RemainderReport,
}

pub fn kam_remainder(a: &RemainderArgs, out: &mut Outputs) -> Result<(), CliError> {
    require(a.sites.len() == 1, || "--sites takes exactly one site here".into())?;
    positive("eps", a.eps)?;
    require(a.eps < 0.1, || format!("--eps {} is outside the perturbative range", a.eps))?;
    require(a.lcap >= 1, || "--lcap must be at least 1".into())?;
    let setup = ContourRemainderSetup {
        lambda: a.lambda,
        omega: a.omega,
        eps: a.eps,
        site: a.sites[0],
        jmax: a.jmax,
        lcap: a.lcap,
        grid: a.grid,
        transport_steps: a.transport_steps,
        dio: validated_dio(a.dio.params(), 1)?,
    };
    let cr = contour_remainder(&setup)?;
    let mut rep = remainder_kam_run(&cr.mu0, &cr.r0, &cr.frequencies, &setup.dio, a.steps)?;
    let mut transport = cr.transport;
    if !a.common.timing {
        rep.steps.iter_mut().for_each(|s| s.wallclock = 0.0);
        transport.iter_mut().for_each(|s| s.wallclock = 0.0);
    }
    let rows: Vec<Vec<Cell>> = rep
        .r_inf()
        .into_iter()
        .map(|(j, r)| vec![Cell::Int(j), rep.mu0.get(j).into(), rep.mu_inf.get(j).into(), r.into(), (j as f64 * r).into()])
        .collect();
    out.csv("remainder-spectrum.csv", &["j", "mu0", "mu_inf", "r_inf", "j_r_inf"], &rows)?;
    let file = RemainderFile {
        setup,
        frequencies: cr.frequencies,
        v0: cr.v0,
        c: cr.c,
        transport,
        transport_residual: cr.transport_residual,
        raw_reality_defect: cr.reality_defect,
        raw_reversibility_defect: cr.reversibility_defect,
        report: rep,
    };
    out.json("remainder-report.json", &file)
}

pub fn cantor_measure(a: &CantorArgs, out: &mut Outputs) -> Result<(), CliError> {
    require(!a.gammas.is_empty(), || "--gammas is empty".into())?;
    for &g in &a.gammas {
        require(g > 0.0 && g < 1.0, || format!("gamma {g} outside (0, 1)"))?;
    }
    require(a.tau1 > a.sites.len() as f64, || format!("--tau1 must exceed the number of sites ({})", a.sites.len()))?;
    let setup = MeasureSetup {
        lambda_lo: a.lambda_lo,
        lambda_hi: a.lambda_hi,
        omega: a.omega,
        sites: a.sites.clone(),
        tau1: a.tau1,
        lmax: a.lmax,
        grid: a.grid,
        gammas: a.gammas.clone(),
    };
    let rep = resonant_complement_measure(&setup, Exec::default())?;
    let mut rows = Vec::new();
    for (g, ivs) in rep.gamma_values.iter().zip(&rep.intervals) {
        for &(lo, hi) in ivs {
            rows.push(vec![(*g).into(), lo.into(), hi.into()]);
        }
    }
    out.csv("cantor-intervals.csv", &["gamma", "interval_lo", "interval_hi"], &rows)?;
    out.json("cantor-report.json", &rep)
}

pub fn bessel_table(a: &BesselArgs, out: &mut Outputs) -> Result<(), CliError> {
    require(a.jmax >= 1 && a.jmax <= 200, || format!("--jmax must lie in 1..=200, got {}", a.jmax))?;
    for &l in &a.lambdas {
        require(l > 0.0 && l <= 50.0, || format!("lambda {l} outside (0, 50]"))?;
    }
    let mut rows = Vec::new();
    for &l in &a.lambdas {
        for j in 1..=a.jmax {
            rows.push(vec![
                l.into(),
                Cell::Int(j as i64),
                product_ik(j, l).into(),
                series_product_dd(j, l).into(),
                nicholson_product(j, l, 1.0 / 64.0).into(),
                laplace_product(j, l, 0).into(),
            ]);
        }
    }
    out.csv("bessel-table.csv", &["lambda", "j", "ik", "series", "nicholson", "laplace"], &rows)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

fn check(name: &str, value: f64, threshold: f64) -> Check {
    Check { name: name.into(), value, threshold, pass: value <= threshold }
}

/// Fast invariant checks, each reported as `value ≤ threshold`.
pub fn selftest_checks(seed: u64) -> Result<Vec<Check>, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    let mut gap: f64 = 0.0;
    for &l in &[0.5, 2.0] {
        for j in 1..=6 {
            let s = series_product_dd(j, l);
            let n = nicholson_product(j, l, 1.0 / 64.0);
            let p = laplace_product(j, l, 0);
            gap = gap.max((s - n).abs().max((s - p).abs()).max((n - p).abs()) / s);
        }
    }
    out.push(check("bessel oracles agree", gap, 1e-10));

    let small = (1..=10).map(|j| (product_ik(j, 1e-5) - 0.5 / j as f64).abs()).fold(0.0, f64::max);
    out.push(check("small-lambda limit 1/(2j)", small, 1e-4));

    let ctx = SpectrumContext::new(1.0, 0.5, vec![1])?;
    let drops = (1..200).filter(|&j| omega_j(&ctx, j + 1) / (j + 1) as f64 <= omega_j(&ctx, j) / j as f64).count();
    out.push(check("Omega_j/j strictly increasing", drops as f64, 0.0));

    let mut worst: f64 = 0.0;
    for _ in 0..20 {
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
    out.push(check("non-degeneracy determinant", worst, 1e-10));

    let contour = Contour::new(1.0, 64)?;
    let f0 = contour.f_lambda(&FourierCurve::zero(64))?.max_abs();
    out.push(check("F[0] vanishes", f0, 1e-12));

    let c32 = Contour::new(1.0, 32)?;
    let r0 = FourierCurve::cosines(32, &[(3, 1e-3)]).map_err(|e| CliError::Validation(e.to_string()))?;
    let tr = run_evolution(&c32, &r0, 0.5, &EvolutionConfig::new(1e-2, 0.2))?;
    out.push(check("mean conserved", tr.report.drift_mean, 1e-13));
    out.push(check("energy drift", tr.report.drift_e, 1e-8));
    out.push(check("impulse drift", tr.report.drift_j, 1e-8));

    let r = FourierCurve::cosines(64, &[(1, 0.05), (3, 0.025)]).map_err(|e| CliError::Validation(e.to_string()))?;
    let dirs = vec![random_direction(&mut rng, 64)];
    let eps = [1e-2, 1e-3];
    let errs = linearization_errors(&contour, &r, 0.5, &dirs, &eps)?;
    out.push(check("linearization order deficit", (2.0 - observed_orders(&eps, &errs[0])[0]).max(0.0), 0.2));

    let tctx = SpectrumContext::new(1.0, 0.5, vec![2])?;
    let om = frequency_vector(&tctx);
    let dio = DiophantineParams::default();
    let mut f = TorusFunction::zero(1, 16);
    for _ in 0..12 {
        let l = rng.gen_range(-4i64..=4);
        let j = rng.gen_range(-4i64..=4);
        f.set_pair(&[l], j, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * 1e-3);
    }
    let sol = solve_transport_homological(v0(&tctx), &f, &om, 16, &dio);
    let res = homological_residual(v0(&tctx), &f, &sol.g, &om, 16);
    let unclipped = res
        .modes()
        .filter(|(l, j, _)| !sol.clipped.iter().any(|(cl, cj)| cl == l && cj == j))
        .fold(0.0, |a: f64, (_, _, c)| a.max(c.norm()));
    out.push(check("transport homological residual", unclipped, 1e-12));

    let fm = manufactured_perturbation(1, 16, 1.0, 1e-3, dio.gamma);
    let rep = transport_kam_run(&fm, v0(&tctx), &om, &dio, 3)?;
    let d: Vec<f64> = std::iter::once(rep.initial_delta.0).chain(rep.steps.iter().map(|s| s.delta_s0)).collect();
    let rises = d.windows(2).filter(|w| w[1] >= w[0]).count();
    out.push(check("transport KAM decreases", rises as f64, 0.0));

    let sq = |x: f64| x * x;
    let dsq = |x: f64| 2.0 * x;
    let d2sq = |_: f64| 2.0;
    let alphas = [1e-4, 1e-2];
    let rr = russmann_check(&[&sq, &dsq, &d2sq], (-1.0, 1.0), 2001, &alphas, 1.0)?;
    let dev = rr.measures.iter().zip(&alphas).map(|(m, a)| (m / (2.0 * a.sqrt()) - 1.0).abs()).fold(0.0, f64::max);
    out.push(check("sublevel set of x^2", dev, 1e-6));

    Ok(out)
}

pub fn selftest(a: &SelftestArgs, out: &mut Outputs) -> Result<(), CliError> {
    let checks = selftest_checks(a.common.seed)?;
    out.json("selftest.json", &checks)?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failure(format!("failed checks: {}", failed.join(", "))))
    }
}
