use criterion::{black_box, criterion_group, criterion_main, Criterion};
use moc_core::basis::{enumerate_fp1, Budget, Fp1Instance};
use moc_core::exactnum::{legacy_decode, legacy_encode, BigInt};
use moc_core::fixtures;
use moc_core::ilp::{gomory_solve, IlpProblem, DEFAULT_PIVOT_LIMIT};
use moc_core::improve::ImproveContext;
use moc_core::intlin::{dec_solve, fba};
use moc_core::IntMatrix;

fn codec(c: &mut Criterion) {
    let n: BigInt = "-123456789012345678901234567890".parse().unwrap();
    c.bench_function("legacy round trip", |b| b.iter(|| legacy_decode(&legacy_encode(black_box(&n))).unwrap()));
}

fn gomory(c: &mut Criterion) {
    let p = IlpProblem::from_i64(
        &[
            vec![1, 0, 0],
            vec![0, 1, 0],
            vec![0, 0, 1],
            vec![0, 0, 1],
            vec![1, 0, 0],
            vec![0, 1, 0],
            vec![0, 0, -1],
            vec![-1, 0, 0],
            vec![0, -1, 0],
        ],
        &[1, 1, 1, 2, 1, 1, -1, -1, -1],
        &[1, 0, 0],
    )
    .unwrap();
    c.bench_function("gomory bit system", |b| b.iter(|| gomory_solve(black_box(&p), true, DEFAULT_PIVOT_LIMIT)));
}

fn linear(c: &mut Criterion) {
    let m = IntMatrix::from_vec_i64(&[
        vec![2, 1, 0, 3, 1],
        vec![0, 3, 1, 1, 4],
        vec![1, 0, 5, 2, 0],
        vec![4, 1, 1, 0, 2],
    ]);
    let w = m.vec_mul(&[3, -1, 2, 5].map(BigInt::from));
    c.bench_function("dec_solve 4x5", |b| b.iter(|| dec_solve(black_box(&w), &m).unwrap()));
    let gens: Vec<Vec<BigInt>> = (0..6).map(|k| m.row(k % 4).to_vec()).collect();
    c.bench_function("fba 6 generators", |b| b.iter(|| fba(black_box(&gens)).unwrap()));
}

fn improve(c: &mut Criterion) {
    c.bench_function("co2 pim tests", |b| {
        b.iter(|| {
            let mut ctx = ImproveContext::new(fixtures::co2_u(), fixtures::co2_b(), fixtures::co2_p()).unwrap();
            ctx.detect_atoms();
            for j in 0..16 {
                let _ = ctx.pim_test(j).unwrap();
            }
            ctx.pims.len()
        })
    });
}

fn fundamental_problem(c: &mut Criterion) {
    let inst = Fp1Instance { u: fixtures::co1_u(), v: fixtures::co1_v(), w: fixtures::co1_w() };
    let mut g = c.benchmark_group("fp1");
    g.sample_size(10);
    g.bench_function("co1 mod 7", |b| b.iter(|| enumerate_fp1(black_box(&inst), Budget::default()).unwrap()));
    g.finish();
}

criterion_group!(benches, codec, gomory, linear, improve, fundamental_problem);
criterion_main!(benches);
