//! Property tests for the algebraic core: bracket identities, potential
//! recovery, push-forward functoriality, and the rank oracle.

use liederiv::lie::rank_over_r_ders;
use liederiv::linalg::ratfunc_det;
use liederiv::poly::potential;
use liederiv::{Automorphism, Derivation, Monomial, MultiPoly, RatFunc};
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

const NVARS: usize = 3;

fn q(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn arb_coeff() -> impl Strategy<Value = BigRational> {
    (-9i64..=9, 1i64..=3).prop_map(|(n, d)| BigRational::new(n.into(), d.into()))
}

/// Sparse polynomial in NVARS variables, total degree <= 3.
fn arb_poly() -> impl Strategy<Value = MultiPoly> {
    prop::collection::vec(
        (
            prop::collection::vec(0u32..=3, NVARS).prop_filter("degree", |e| {
                e.iter().sum::<u32>() <= 3
            }),
            arb_coeff(),
        ),
        0..4,
    )
    .prop_map(|terms| {
        MultiPoly::from_terms(NVARS, terms.into_iter().map(|(e, c)| (Monomial(e), c)))
    })
}

/// Rational function with a small numerator and a small denominator
/// (1 or 1 + c x_k); anything larger makes the exact gcd arithmetic
/// dominate the test run.
fn arb_ratfunc() -> impl Strategy<Value = RatFunc> {
    let small_num = prop::collection::vec(
        (
            prop::collection::vec(0u32..=2, NVARS)
                .prop_filter("degree", |e| e.iter().sum::<u32>() <= 2),
            arb_coeff(),
        ),
        0..3,
    )
    .prop_map(|terms| {
        MultiPoly::from_terms(NVARS, terms.into_iter().map(|(e, c)| (Monomial(e), c)))
    });
    (small_num, 0usize..=NVARS, arb_coeff()).prop_map(|(n, k, c)| {
        if k == NVARS || c.is_zero() {
            RatFunc::from_poly(n)
        } else {
            let den = MultiPoly::one(NVARS).add(&MultiPoly::var(NVARS, k).scale(&c));
            RatFunc::new(n, den).unwrap()
        }
    })
}

fn arb_derivation() -> impl Strategy<Value = Derivation> {
    prop::collection::vec(arb_poly(), NVARS)
        .prop_map(|cs| Derivation::new(cs.into_iter().map(RatFunc::from_poly).collect()))
}

/// Triangular automorphism: x_i -> x_i + p_i(x_{i+1}, ..., x_n), degree <= 2.
fn arb_triangular_auto() -> impl Strategy<Value = Automorphism> {
    prop::collection::vec((arb_coeff(), arb_coeff(), arb_coeff()), NVARS).prop_map(|rows| {
        let x = |i| MultiPoly::var(NVARS, i);
        let mut images = Vec::with_capacity(NVARS);
        for (i, (c0, c1, c2)) in rows.into_iter().enumerate() {
            let mut img = x(i).add(&MultiPoly::constant(NVARS, c0));
            if i + 1 < NVARS {
                img = img.add(&x(i + 1).scale(&c1)).add(&x(i + 1).pow(2).scale(&c2));
            }
            if i + 2 < NVARS {
                img = img.add(&x(i + 2).scale(&c2));
            }
            images.push(img);
        }
        Automorphism::new(images).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn leibniz_rule(d in arb_derivation(), f in arb_ratfunc(), g in arb_ratfunc()) {
        let lhs = d.apply(&f.mul(&g));
        let rhs = d.apply(&f).mul(&g).add(&f.mul(&d.apply(&g)));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn jacobi_identity(a in arb_derivation(), b in arb_derivation(), c in arb_derivation()) {
        let s = a.bracket(&b).bracket(&c)
            .add(&b.bracket(&c).bracket(&a))
            .add(&c.bracket(&a).bracket(&b));
        prop_assert!(s.is_zero());
    }

    #[test]
    fn scaled_bracket_identity(
        a in arb_derivation(),
        b in arb_derivation(),
        f in arb_ratfunc(),
        g in arb_ratfunc(),
    ) {
        // [fA, gB] = fg[A,B] + f A(g) B - g B(f) A
        let lhs = a.scale(&f).bracket(&b.scale(&g));
        let rhs = a.bracket(&b).scale(&f.mul(&g))
            .add(&b.scale(&f.mul(&a.apply(&g))))
            .sub(&a.scale(&g.mul(&b.apply(&f))));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn potential_recovers_gradient(
        terms in prop::collection::vec(
            ((0u32..=5, 0u32..=5), arb_coeff()),
            0..6,
        )
    ) {
        let h = MultiPoly::from_terms(
            2,
            terms
                .into_iter()
                .filter(|((i, j), _)| i + j <= 5)
                .map(|((i, j), c)| (Monomial(vec![i, j]), c)),
        );
        let f = h.derivative(0);
        let g = h.derivative(1);
        let rec = potential(&f, &g, 0, 1).unwrap();
        prop_assert!(rec.sub(&h).is_constant());
    }

    #[test]
    fn pushforward_preserves_brackets(
        a in arb_derivation(),
        b in arb_derivation(),
        phi in arb_triangular_auto(),
    ) {
        let lhs = a.bracket(&b).pushforward(&phi);
        let rhs = a.pushforward(&phi).bracket(&b.pushforward(&phi));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn pushforward_round_trip(a in arb_derivation(), phi in arb_triangular_auto()) {
        let inv = Automorphism::new(phi.inverse_images().to_vec()).unwrap();
        prop_assert_eq!(a.pushforward(&phi).pushforward(&inv), a);
    }

    #[test]
    fn rank_matches_det_oracle_3x3(
        rows in prop::collection::vec(prop::collection::vec(arb_poly(), NVARS), 3)
    ) {
        let ders: Vec<Derivation> = rows
            .into_iter()
            .map(|r| Derivation::new(r.into_iter().map(RatFunc::from_poly).collect()))
            .collect();
        let rank = rank_over_r_ders(&ders);
        // oracle: largest k with a nonzero k x k minor
        let mut oracle = 0;
        for size in 1..=3usize {
            let mut found = false;
            for rsel in subsets(3, size) {
                for csel in subsets(NVARS, size) {
                    let m: Vec<Vec<RatFunc>> = rsel
                        .iter()
                        .map(|&i| csel.iter().map(|&j| ders[i].coeff(j).clone()).collect())
                        .collect();
                    if !ratfunc_det(&m).is_zero() {
                        found = true;
                        break;
                    }
                }
                if found {
                    break;
                }
            }
            if found {
                oracle = size;
            }
        }
        prop_assert_eq!(rank, oracle);
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

#[test]
fn formal_integration_examples() {
    // d/dx3 then integrate x2*x3 in x3
    let x2 = MultiPoly::var(3, 1);
    let x3 = MultiPoly::var(3, 2);
    let p = x2.mul(&x3);
    let int = p.integrate(2);
    assert_eq!(int, x2.mul(&x3.pow(2)).scale(&BigRational::new(1.into(), 2.into())));
    assert_eq!(int.derivative(2), p);
    let _ = q(0);
}
