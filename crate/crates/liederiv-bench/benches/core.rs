use criterion::{criterion_group, criterion_main, Criterion};
use liederiv::{classify, k_linear_reduce, poly_gcd, Derivation, MultiPoly, RatFunc};
use num_rational::BigRational;

fn xr(i: usize) -> RatFunc {
    RatFunc::var(3, i)
}

fn d(i: usize) -> Derivation {
    Derivation::partial(3, i)
}

fn bench_bracket(c: &mut Criterion) {
    let half = BigRational::new(1.into(), 2.into());
    let f = xr(0)
        .pow(3)
        .add(&xr(1).mul(&xr(2)).scale(&half))
        .div(&xr(2).pow(2).add(&RatFunc::one(3)))
        .unwrap();
    let g = xr(1).pow(4).sub(&xr(0).mul(&xr(2)));
    let d1 = Derivation::new(vec![f.clone(), g.clone(), f.mul(&g)]);
    let d2 = Derivation::new(vec![g.clone(), f.clone(), f.add(&g)]);
    c.bench_function("bracket", |bch| bch.iter(|| d1.bracket(&d2)));
}

fn bench_gcd(c: &mut Criterion) {
    let x = MultiPoly::var(3, 0);
    let y = MultiPoly::var(3, 1);
    let common = x.pow(2).add(&y.pow(3)).add(&MultiPoly::one(3));
    let p = common.mul(&x.pow(3).add(&y));
    let q = common.mul(&y.pow(2).sub(&x));
    c.bench_function("poly_gcd", |bch| bch.iter(|| poly_gcd(&p, &q).unwrap()));
}

fn bench_classify(c: &mut Criterion) {
    let gens = vec![
        d(2),
        d(1),
        d(0),
        d(0).scale(&xr(2)),
        d(0).scale(&xr(1)),
        d(0).scale(&xr(1).mul(&xr(2))),
    ];
    let basis = k_linear_reduce(&gens).unwrap();
    c.bench_function("classify_l2", |bch| bch.iter(|| classify(&basis).unwrap()));
}

criterion_group!(benches, bench_bracket, bench_gcd, bench_classify);
criterion_main!(benches);
