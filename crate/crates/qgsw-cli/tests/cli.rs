use qgsw_cli::commands::{RemainderFile, TransportFile};
use qgsw_cli::io::{emit_csv, load_csv, Cell};
use qgsw_patch::contour::FourierCurve;
use qgsw_patch::spectrum::{omega_j, SpectrumContext};
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qgsw(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qgsw"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn spectrum_rows_match_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let o = qgsw(&["spectrum", "--lambda", "1", "--omega", "0.5", "--jmax", "64"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let t = load_csv(&dir.path().join("spectrum.csv")).unwrap();
    assert_eq!(t.header, ["j", "omega_j", "residual", "residual_j4"]);
    assert_eq!(t.rows.len(), 64);
    let ctx = SpectrumContext::new(1.0, 0.5, vec![1]).unwrap();
    for (k, w) in t.floats("omega_j").unwrap().into_iter().enumerate() {
        assert_eq!(w, omega_j(&ctx, k as i64 + 1));
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("run-manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"]["subcommand"], "spectrum");
    assert_eq!(manifest["command"]["jmax"], 64);
    assert_eq!(manifest["outputs"][0], "spectrum.csv");
}

#[test]
fn transport_report_has_four_decreasing_steps() {
    let dir = tempfile::tempdir().unwrap();
    let o = qgsw(&["kam-transport", "--d", "1", "--n0", "4", "--steps", "4", "--delta0", "1e-3"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("transport-report.json")).unwrap();
    assert!(text.contains("\"N_m\""));
    let rep: TransportFile = serde_json::from_str(&text).unwrap();
    assert_eq!(rep.steps.len(), 4);
    let mut prev = rep.initial_delta_s0;
    for s in &rep.steps {
        assert!(s.delta_s0 < prev);
        assert_eq!(s.wallclock, 0.0);
        prev = s.delta_s0;
    }
}

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = qgsw(&["selftest"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let checks: Vec<serde_json::Value> =
        serde_json::from_str(&fs::read_to_string(dir.path().join("selftest.json")).unwrap()).unwrap();
    assert!(checks.len() >= 10);
    assert!(checks.iter().all(|c| c["pass"] == true));
}

#[test]
fn identical_flags_give_identical_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["linearize-check", "--grid", "64", "--directions", "3", "--seed", "7"];
    assert_eq!(code(&qgsw(&args, a.path())), 0);
    assert_eq!(code(&qgsw(&args, b.path())), 0);
    for f in ["linearize.csv", "linearize.json"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let c = tempfile::tempdir().unwrap();
    let args = ["linearize-check", "--grid", "64", "--directions", "3", "--seed", "8"];
    assert_eq!(code(&qgsw(&args, c.path())), 0);
    assert_ne!(fs::read(a.path().join("linearize.csv")).unwrap(), fs::read(c.path().join("linearize.csv")).unwrap());
}

#[test]
fn evolve_snapshots_reload_and_continue() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["evolve", "--grid", "32", "--dt", "0.01", "--t-end", "0.1", "--record-every", "5"];
    let o = qgsw(&args, dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let t = load_csv(&dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(t.header, ["t", "E", "J", "mean"]);
    assert_eq!(t.rows.len(), 3);
    let last = FourierCurve::from_json(&fs::read_to_string(dir.path().join("curve-final.json")).unwrap()).unwrap();
    let same = FourierCurve::from_json(&fs::read_to_string(dir.path().join("curve-00002.json")).unwrap()).unwrap();
    assert_eq!(last, same);
    assert!((last.coeffs[2].norm() - 5e-4).abs() < 1e-8);

    let next = tempfile::tempdir().unwrap();
    let init = dir.path().join("curve-final.json");
    let o = qgsw(&["evolve", "--grid", "32", "--dt", "0.01", "--t-end", "0.05", "--init", init.to_str().unwrap()], next.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn remainder_outputs_agree() {
    let dir = tempfile::tempdir().unwrap();
    let o = qgsw(&["kam-remainder", "--jmax", "8", "--lcap", "4", "--grid", "32", "--steps", "2"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rep: RemainderFile =
        serde_json::from_str(&fs::read_to_string(dir.path().join("remainder-report.json")).unwrap()).unwrap();
    let t = load_csv(&dir.path().join("remainder-spectrum.csv")).unwrap();
    let js = t.floats("j").unwrap();
    let r = t.floats("r_inf").unwrap();
    assert_eq!(js.len(), rep.report.mu_inf.mu.len());
    for (j, r) in js.iter().zip(&r) {
        let j = *j as i64;
        assert_eq!(*r, rep.report.mu_inf.get(j) - rep.report.mu0.get(j));
    }
}

#[test]
fn cantor_and_bessel_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = qgsw(&["cantor-measure", "--grid", "10000", "--lmax", "5", "--gammas", "1e-2,1e-3"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let t = load_csv(&dir.path().join("cantor-intervals.csv")).unwrap();
    assert_eq!(t.header, ["gamma", "interval_lo", "interval_hi"]);
    for row in &t.rows {
        assert!(row[1].parse::<f64>().unwrap() < row[2].parse::<f64>().unwrap());
    }

    let o = qgsw(&["bessel-table", "--lambdas", "0.5,2", "--jmax", "5"], dir.path());
    assert_eq!(code(&o), 0);
    let t = load_csv(&dir.path().join("bessel-table.csv")).unwrap();
    assert_eq!(t.rows.len(), 10);
    let ik = t.floats("ik").unwrap();
    let series = t.floats("series").unwrap();
    for (a, b) in ik.iter().zip(&series) {
        assert!((a - b).abs() <= 1e-13 * b);
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&qgsw(&["spectrum", "--lambda", "-1"], dir.path())), 1);
    assert_eq!(code(&qgsw(&["spectrum", "--no-such-flag"], dir.path())), 1);
    assert_eq!(code(&qgsw(&["kam-transport", "--gamma", "2"], dir.path())), 1);
    assert_eq!(code(&qgsw(&["kam-transport", "--d", "2", "--sites", "2"], dir.path())), 1);
    // Demanding an order no difference quotient reaches is a check failure.
    let o = qgsw(&["linearize-check", "--grid", "32", "--directions", "1", "--min-order", "5"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(dir.path().join("linearize.json").exists());
    let help = Command::new(env!("CARGO_BIN_EXE_qgsw")).arg("--help").output().unwrap();
    assert_eq!(code(&help), 0);
}

#[test]
fn csv_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.csv");
    let vals = [0.1, -1.0 / 3.0, 6.02214076e23, f64::MIN_POSITIVE, 5e-324, -0.0];
    let rows: Vec<Vec<Cell>> = vals.iter().enumerate().map(|(k, &v)| vec![Cell::Int(k as i64), v.into()]).collect();
    emit_csv(&p, &["k", "v"], &rows).unwrap();
    let back = load_csv(&p).unwrap().floats("v").unwrap();
    for (a, b) in vals.iter().zip(&back) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
    assert!(!fs::read(&p).unwrap().contains(&b'\r'));
}

#[test]
fn csv_rejects_non_finite_and_keeps_old_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.csv");
    emit_csv(&p, &["v"], &[vec![1.0.into()]]).unwrap();
    assert!(emit_csv(&p, &["v"], &[vec![f64::NAN.into()]]).is_err());
    assert!(emit_csv(&p, &["v"], &[vec![f64::NEG_INFINITY.into()]]).is_err());
    assert_eq!(load_csv(&p).unwrap().rows.len(), 1);
}

#[test]
fn empty_table_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("empty.csv");
    emit_csv(&p, &["gamma", "interval_lo", "interval_hi"], &[]).unwrap();
    assert_eq!(fs::read_to_string(&p).unwrap(), "gamma,interval_lo,interval_hi\n");
    let t = load_csv(&p).unwrap();
    assert_eq!(t.header.len(), 3);
    assert!(t.rows.is_empty());
}
