use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;
use qgsw_patch::cantor::{resonant_complement_measure, MeasureSetup};
use qgsw_patch::contour::{kernel_matrix, Contour, FourierCurve};
use qgsw_patch::par::Exec;
use std::hint::black_box;

const PATHS: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn kernel(c: &mut Criterion) {
    let mut group = c.benchmark_group("kernel_matrix");
    for m in [64usize, 128] {
        let contour = Contour::new(1.0, m).unwrap();
        let r = FourierCurve::from_modes(m, &[(3, Complex64::new(1e-2, 0.0)), (5, Complex64::new(0.0, 4e-3))]).unwrap();
        let geom = contour.geometry(&r).unwrap();
        for (name, exec) in PATHS {
            group.bench_with_input(BenchmarkId::new(name, m), &m, |b, _| {
                b.iter(|| kernel_matrix(black_box(&geom), contour.tables(), exec))
            });
        }
    }
    group.finish();
}

fn rhs(c: &mut Criterion) {
    let mut group = c.benchmark_group("contour_rhs");
    let m = 128;
    let r = FourierCurve::from_modes(m, &[(2, Complex64::new(2e-2, 1e-2))]).unwrap();
    for (name, exec) in PATHS {
        let contour = Contour::new(1.0, m).unwrap().with_exec(exec);
        group.bench_function(name, |b| b.iter(|| contour.rhs(black_box(&r), 0.5).unwrap()));
    }
    group.finish();
}

fn measure(c: &mut Criterion) {
    let mut group = c.benchmark_group("resonant_measure");
    group.sample_size(10);
    let setup = MeasureSetup {
        lambda_lo: 0.5,
        lambda_hi: 2.0,
        omega: 0.5,
        sites: vec![2, 3],
        tau1: 3.0,
        lmax: 8,
        grid: 20_000,
        gammas: vec![1e-2, 1e-3, 1e-4],
    };
    for (name, exec) in PATHS {
        group.bench_function(name, |b| b.iter(|| resonant_complement_measure(black_box(&setup), exec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, kernel, rhs, measure);
criterion_main!(benches);
