//! Multivariate polynomial gcd via the subresultant polynomial remainder
//! sequence, recursing on the number of variables.

use num_rational::BigRational;
use num_traits::Zero;

use crate::poly::MultiPoly;
use crate::ArithError;

/// Monic greatest common divisor under the global grlex order.
/// Divides both inputs exactly; errors when both inputs are zero.
pub fn poly_gcd(p: &MultiPoly, q: &MultiPoly) -> Result<MultiPoly, ArithError> {
    assert_eq!(p.nvars, q.nvars, "variable count mismatch");
    if p.is_zero() && q.is_zero() {
        return Err(ArithError::GcdOfZeros);
    }
    if p.is_zero() {
        return Ok(q.monic());
    }
    if q.is_zero() {
        return Ok(p.monic());
    }
    // cheap fast paths: one input divides the other
    if p.divides(q) {
        return Ok(q.monic());
    }
    if q.divides(p) {
        return Ok(p.monic());
    }
    Ok(gcd_nonzero(&int_normalize(p), &int_normalize(q)).monic())
}

/// Scale so the coefficients are coprime integers; keeps the numbers small
/// inside the pseudo-remainder sequence. The gcd is only defined up to a
/// constant, so this does not change `poly_gcd` results.
fn int_normalize(p: &MultiPoly) -> MultiPoly {
    use num_bigint::BigInt;
    use num_integer::Integer;
    let mut den_lcm = BigInt::from(1);
    let mut num_gcd = BigInt::from(0);
    for (_, c) in p.terms() {
        den_lcm = den_lcm.lcm(c.denom());
        num_gcd = num_gcd.gcd(c.numer());
    }
    if num_gcd.is_zero() {
        return p.clone();
    }
    p.scale(&BigRational::new(den_lcm, num_gcd))
}

/// Least common multiple, monic. Both inputs must be nonzero.
pub fn poly_lcm(p: &MultiPoly, q: &MultiPoly) -> Result<MultiPoly, ArithError> {
    if p.is_zero() || q.is_zero() {
        return Err(ArithError::GcdOfZeros);
    }
    let g = poly_gcd(p, q)?;
    Ok(p.mul(q).div_exact(&g).monic())
}

fn gcd_nonzero(p: &MultiPoly, q: &MultiPoly) -> MultiPoly {
    if p.is_constant() || q.is_constant() {
        return MultiPoly::one(p.nvars);
    }
    // Main variable: highest index occurring in either input.
    let v = (0..p.nvars)
        .rev()
        .find(|&i| p.degree_in(i) > 0 || q.degree_in(i) > 0)
        .expect("nonconstant polynomial with no variables");

    let (cont_p, pp_p) = content_and_primitive(p, v);
    let (cont_q, pp_q) = content_and_primitive(q, v);
    let cont = gcd_nonzero_or_const(&cont_p, &cont_q);

    let prim = subresultant_prs(&pp_p, &pp_q, v);
    cont.mul(&prim)
}

fn gcd_nonzero_or_const(p: &MultiPoly, q: &MultiPoly) -> MultiPoly {
    if p.is_constant() || q.is_constant() {
        MultiPoly::one(p.nvars)
    } else {
        gcd_nonzero(p, q).monic()
    }
}

/// Content (gcd of the coefficients w.r.t. variable `v`) and primitive part.
fn content_and_primitive(p: &MultiPoly, v: usize) -> (MultiPoly, MultiPoly) {
    let deg = p.degree_in(v);
    let mut cont: Option<MultiPoly> = None;
    for k in 0..=deg {
        let c = p.coeff_of(v, k);
        if c.is_zero() {
            continue;
        }
        cont = Some(match cont {
            None => c.monic(),
            Some(g) => gcd_nonzero_or_const(&g, &c),
        });
        if cont.as_ref().unwrap().is_constant() {
            cont = Some(MultiPoly::one(p.nvars));
            break;
        }
    }
    let cont = cont.expect("content of zero polynomial");
    (cont.clone(), p.div_exact(&cont))
}

/// Gcd of two primitive polynomials in the main variable `v`, returned as a
/// primitive polynomial (monic under grlex).
fn subresultant_prs(p: &MultiPoly, q: &MultiPoly, v: usize) -> MultiPoly {
    let (mut a, mut b) = if p.degree_in(v) >= q.degree_in(v) {
        (p.clone(), q.clone())
    } else {
        (q.clone(), p.clone())
    };
    let nvars = p.nvars;
    let mut g = MultiPoly::one(nvars);
    let mut h = MultiPoly::one(nvars);
    loop {
        let delta = a.degree_in(v) - b.degree_in(v);
        let r = pseudo_rem(&a, &b, v);
        if r.is_zero() {
            break;
        }
        if b.degree_in(v) == 0 {
            // remainder sequence reached a constant in v: inputs are coprime
            return MultiPoly::one(nvars);
        }
        a = b;
        let divisor = g.mul(&h.pow(delta));
        b = r.div_exact(&divisor);
        g = a.coeff_of(v, a.degree_in(v));
        if delta > 0 {
            // h <- g^delta / h^(delta-1), an exact division
            h = g.pow(delta).div_exact(&h.pow(delta - 1));
        }
    }
    if b.degree_in(v) == 0 {
        return MultiPoly::one(nvars);
    }
    let (_, pp) = content_and_primitive(&b, v);
    pp.monic()
}

/// Pseudo-remainder of `a` by `b` in variable `v`:
/// lc(b)^(deg a - deg b + 1) * a reduced modulo b.
fn pseudo_rem(a: &MultiPoly, b: &MultiPoly, v: usize) -> MultiPoly {
    let db = b.degree_in(v);
    let lb = b.coeff_of(v, db);
    let mut r = a.clone();
    let e = a.degree_in(v) as i64 - db as i64 + 1;
    let mut steps = 0i64;
    while !r.is_zero() && r.degree_in(v) >= db {
        let dr = r.degree_in(v);
        let lr = r.coeff_of(v, dr);
        r = r.mul(&lb).sub(&lr.mul_var_pow(v, dr - db).mul(b));
        steps += 1;
        if r.is_zero() {
            break;
        }
    }
    // scale so the full lc(b)^e factor is applied uniformly
    for _ in steps..e {
        r = r.mul(&lb);
    }
    r
}

/// Normalize a rational coefficient gcd helper used by tests: the gcd of a
/// polynomial and a nonzero constant is 1.
pub fn is_unit(p: &MultiPoly) -> bool {
    p.as_constant().map(|c| !c.is_zero()).unwrap_or(false)
}

#[allow(unused)]
fn big(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> MultiPoly {
        MultiPoly::var(3, i)
    }

    #[test]
    fn explicit_factorization() {
        let p = x(0).pow(2).sub(&x(1).pow(2));
        let q = x(0).sub(&x(1));
        assert_eq!(poly_gcd(&p, &q).unwrap(), x(0).sub(&x(1)));
    }

    #[test]
    fn unit_case() {
        let p = x(0).mul(&x(1)).add(&MultiPoly::from_int(3, 3));
        assert_eq!(poly_gcd(&p, &MultiPoly::one(3)).unwrap(), MultiPoly::one(3));
    }

    #[test]
    fn monomial_gcd() {
        let p = x(0).mul(&x(1));
        let q = x(0).pow(2);
        assert_eq!(poly_gcd(&p, &q).unwrap(), x(0));
    }

    #[test]
    fn both_zero_rejected() {
        assert!(poly_gcd(&MultiPoly::zero(3), &MultiPoly::zero(3)).is_err());
    }

    #[test]
    fn gcd_divides_both() {
        // (x1+x2)^2 (x3-1)  and  (x1+x2)(x3-1)^2
        let s = x(0).add(&x(1));
        let t = x(2).sub(&MultiPoly::one(3));
        let p = s.pow(2).mul(&t);
        let q = s.mul(&t.pow(2));
        let g = poly_gcd(&p, &q).unwrap();
        assert_eq!(g, s.mul(&t).monic());
        assert!(p.divides(&g));
        assert!(q.divides(&g));
    }

    #[test]
    fn lcm_product_relation() {
        let p = x(0).mul(&x(1));
        let q = x(0).pow(2);
        let l = poly_lcm(&p, &q).unwrap();
        assert_eq!(l, x(0).pow(2).mul(&x(1)));
    }
}
