use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_bigint::BigInt;
use num_rational::BigRational;
use psum::instances::by_name;
use psum::ratfn::berlekamp_massey;
use psum::variety::hensel_enumerate;
use psum::zeta::shell_count;
use psum::Budget;

fn hensel(c: &mut Criterion) {
    let mut group = c.benchmark_group("hensel_enumerate");
    for name in ["square-line", "three-var", "p7-twisted-cubic"] {
        let sys = by_name(name).unwrap().system();
        for m in [3u32, 5] {
            group.bench_with_input(BenchmarkId::new(name, m), &m, |b, &m| {
                b.iter(|| hensel_enumerate(black_box(&sys), m, &Budget::new(u64::MAX), 1).unwrap().count)
            });
        }
    }
    group.finish();
}

fn shells(c: &mut Criterion) {
    let mut group = c.benchmark_group("shell_count");
    for name in ["cube-line", "three-var"] {
        let sys = by_name(name).unwrap().system();
        group.bench_function(name, |b| b.iter(|| shell_count(black_box(&sys), 4, 2, &Budget::new(u64::MAX)).unwrap()));
    }
    group.finish();
}

fn reconstruction(c: &mut Criterion) {
    // coefficients of (1 + t/3) / (1 - t^2/3) and of a longer recurrence
    let third = BigRational::new(BigInt::from(1), BigInt::from(3));
    let mut short = vec![BigRational::from_integer(1.into()), third.clone()];
    for k in 2..40 {
        let next = &short[k - 2] * &third;
        short.push(next);
    }
    let mut long: Vec<BigRational> = (0..8).map(|i| BigRational::from_integer(BigInt::from(i + 1))).collect();
    for k in 8..80 {
        let next = &long[k - 8] * &third + &long[k - 3] / BigRational::from_integer(BigInt::from(7));
        long.push(next);
    }
    c.bench_function("berlekamp_massey/order2", |b| b.iter(|| berlekamp_massey(black_box(&short))));
    c.bench_function("berlekamp_massey/order8", |b| b.iter(|| berlekamp_massey(black_box(&long))));
}

criterion_group!(benches, hensel, shells, reconstruction);
criterion_main!(benches);
