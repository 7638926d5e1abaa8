use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_bigint::BigInt;

use kmv_core::abgroup::{snf, EchelonState};
use kmv_core::exactpoly::RingId;
use kmv_core::fpfilter::{dlog, unit_basis, w_model_len, BasisPart};
use kmv_core::normtower::norm_kl;
use kmv_core::units::{cyclotomic_indices, xi_w_image};
use kmv_core::verify::{child_rng, random_elem, random_one_unit};

fn bench_norm(c: &mut Criterion) {
    let mut g = c.benchmark_group("norm_kl");
    for (p, k, l) in [(3u32, 0u32, 2u32), (3, 1, 2), (5, 0, 2)] {
        let mut rng = child_rng(1, "bench", "norm");
        let a = random_elem(&mut rng, RingId::cyclo(p, k + l).unwrap(), 3);
        g.bench_with_input(BenchmarkId::from_parameter(format!("p{p}_k{k}_l{l}")), &a, |b, a| {
            b.iter(|| norm_kl(black_box(a), k, l).unwrap())
        });
    }
    g.finish();
}

fn bench_dlog(c: &mut Criterion) {
    let mut g = c.benchmark_group("dlog");
    for (p, n) in [(3u32, 81usize), (37, 1369)] {
        let basis = unit_basis(p, n, BasisPart::Full);
        let mut rng = child_rng(2, "bench", "dlog");
        let u = random_one_unit(&mut rng, p, n);
        g.bench_with_input(BenchmarkId::from_parameter(format!("p{p}_n{n}")), &u, |b, u| {
            b.iter(|| dlog(black_box(u), &basis).unwrap())
        });
    }
    g.finish();
}

fn bench_echelon(c: &mut Criterion) {
    let (p, n) = (37u32, 1u32);
    let big_p = 37u64 * 37;
    let m = w_model_len(37);
    let idx = cyclotomic_indices(p, n).unwrap();
    c.bench_function("xi_w_image/p37_n1", |b| b.iter(|| xi_w_image(p, big_p, black_box(idx[7]), m)));
    let imgs: Vec<_> = idx.iter().map(|&a| xi_w_image(p, big_p, a, m)).collect();
    c.bench_function("echelon_insert/p37_n1_all", |b| {
        b.iter(|| {
            let mut e = EchelonState::new(p, m);
            for u in &imgs {
                e.insert(u).unwrap();
            }
            e.log_order()
        })
    });
}

fn bench_snf(c: &mut Criterion) {
    let m: Vec<Vec<BigInt>> =
        (0..8).map(|i| (0..8).map(|j| BigInt::from(((i * 31 + j * 17 + i * j * 7) % 23) as i64 - 11)).collect()).collect();
    c.bench_function("snf/8x8", |b| b.iter(|| snf(black_box(&m))));
}

criterion_group!(benches, bench_norm, bench_dlog, bench_echelon, bench_snf);
criterion_main!(benches);
