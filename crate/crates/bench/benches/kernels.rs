use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use netlocal::linalg::{hermitian_eigen, partial_trace};
use netlocal::swap::star_swap_all;
use netlocal::{chsh_game, compose_lambda, lhv_bound, scenarios, schmidt_pure_state, DensityOperator, DimList, Limits};

fn random_density(n_qubits: usize) -> DensityOperator {
    let dims = DimList::qubits(n_qubits);
    let d = dims.total();
    let amps: Vec<netlocal::C64> =
        (0..d).map(|k| netlocal::C64::new(((k * 7 + 3) % 11) as f64, ((k * 5 + 1) % 13) as f64 - 6.0)).collect();
    netlocal::PureState::normalized(amps, dims).unwrap().density()
}

fn bench_lhv(c: &mut Criterion) {
    let mut group = c.benchmark_group("lhv_bound");
    for n in [2, 3, 4] {
        let g = chsh_game(n).unwrap();
        group.bench_with_input(BenchmarkId::new("chsh", n), &g, |b, g| {
            b.iter(|| lhv_bound(black_box(g), u128::MAX).unwrap())
        });
    }
    let chsh = chsh_game(2).unwrap();
    let lambda = compose_lambda(&chsh, &chsh).unwrap();
    group.bench_function("lambda", |b| b.iter(|| lhv_bound(black_box(&lambda), u128::MAX).unwrap()));
    group.finish();
}

fn bench_partial_trace(c: &mut Criterion) {
    let mut group = c.benchmark_group("partial_trace");
    for n in [4, 6, 8] {
        let rho = random_density(n);
        let keep: Vec<usize> = (0..n / 2).collect();
        group.bench_with_input(BenchmarkId::from_parameter(n), &rho, |b, rho| {
            b.iter(|| partial_trace(black_box(rho.mat()), rho.dims(), &keep).unwrap())
        });
    }
    group.finish();
}

fn bench_eigen(c: &mut Criterion) {
    let mut group = c.benchmark_group("hermitian_eigen");
    for n in [2, 4, 6] {
        let rho = random_density(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &rho, |b, rho| {
            b.iter(|| hermitian_eigen(black_box(rho.mat())).unwrap())
        });
    }
    group.finish();
}

fn bench_networks(c: &mut Criterion) {
    let limits = Limits::default();
    c.bench_function("joint_distribution/lambda", |b| b.iter(|| scenarios::theorem1_demo_with(&limits).unwrap()));
    let pair = schmidt_pure_state(&[0.8, 0.6], 2).unwrap();
    let pairs = vec![pair; 3];
    c.bench_function("star_swap/3", |b| b.iter(|| star_swap_all(black_box(&pairs)).unwrap()));
}

criterion_group!(benches, bench_lhv, bench_partial_trace, bench_eigen, bench_networks);
criterion_main!(benches);
