//! Sparse multivariate polynomials over exact rationals.
//!
//! Terms are kept in a `BTreeMap` ordered by graded lexicographic order,
//! so the leading term is the last entry and printing is canonical.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exponent vector of a monomial, one entry per variable.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// Exact quotient, `None` if `other` does not divide `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(&other.0) {
            if a < b {
                return None;
            }
            out.push(a - b);
        }
        Some(Monomial(out))
    }
}

// Graded lexicographic order: total degree first, then lex with x1 > x2 > ...
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.total_degree().cmp(&other.total_degree()) {
            Ordering::Equal => self.0.cmp(&other.0),
            ord => ord,
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse multivariate polynomial with `BigRational` coefficients.
///
/// Invariant: no stored coefficient is zero and every exponent vector has
/// length `nvars`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MultiPoly {
    pub nvars: usize,
    terms: BTreeMap<Monomial, BigRational>,
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        let mut p = MultiPoly::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(nvars), c);
        }
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, BigRational::one())
    }

    pub fn from_int(nvars: usize, n: i64) -> Self {
        Self::constant(nvars, BigRational::from(BigInt::from(n)))
    }

    /// The variable `x_{i+1}` (zero-based index).
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable index out of range");
        let mut p = MultiPoly::zero(nvars);
        p.terms.insert(Monomial::var(nvars, i), BigRational::one());
        p
    }

    pub fn from_terms(nvars: usize, it: impl IntoIterator<Item = (Monomial, BigRational)>) -> Self {
        let mut p = MultiPoly::zero(nvars);
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms.keys().next().unwrap().is_one())
    }

    /// Constant term as a rational (zero if absent).
    pub fn constant_term(&self) -> BigRational {
        self.terms
            .get(&Monomial::one(self.nvars))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// If the polynomial is constant, return the constant.
    pub fn as_constant(&self) -> Option<BigRational> {
        if self.is_constant() {
            Some(self.constant_term())
        } else {
            None
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| m.total_degree())
            .max()
            .unwrap_or(0)
    }

    /// Leading term under grlex, `None` for the zero polynomial.
    pub fn leading_term(&self) -> Option<(&Monomial, &BigRational)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coeff(&self) -> BigRational {
        self.leading_term()
            .map(|(_, c)| c.clone())
            .unwrap_or_else(BigRational::zero)
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        debug_assert_eq!(m.0.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> MultiPoly {
        let mut out = MultiPoly::zero(self.nvars);
        for (m, c) in &self.terms {
            out.terms.insert(m.clone(), -c.clone());
        }
        out
    }

    pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
        let mut out = MultiPoly::zero(self.nvars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero(self.nvars);
        }
        let mut out = MultiPoly::zero(self.nvars);
        for (m, k) in &self.terms {
            out.terms.insert(m.clone(), k * c);
        }
        out
    }

    pub fn pow(&self, e: u32) -> MultiPoly {
        let mut out = MultiPoly::one(self.nvars);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Divide by the leading coefficient, making the grlex leading coefficient 1.
    pub fn monic(&self) -> MultiPoly {
        if self.is_zero() {
            return self.clone();
        }
        let lc = self.leading_coeff();
        self.scale(&lc.recip())
    }

    /// Exact division: `self = q * d` must hold; panics if it does not.
    /// Works by leading-term elimination under grlex.
    pub fn div_exact(&self, d: &MultiPoly) -> MultiPoly {
        assert!(!d.is_zero(), "division by zero polynomial");
        let mut rem = self.clone();
        let mut q = MultiPoly::zero(self.nvars);
        let (dm, dc) = {
            let (m, c) = d.leading_term().unwrap();
            (m.clone(), c.clone())
        };
        while !rem.is_zero() {
            let (rm, rc) = {
                let (m, c) = rem.leading_term().unwrap();
                (m.clone(), c.clone())
            };
            let qm = rm
                .div(&dm)
                .expect("div_exact: divisor does not divide dividend");
            let qc = rc / &dc;
            let t = MultiPoly::from_terms(self.nvars, [(qm, qc)]);
            rem = rem.sub(&t.mul(d));
            q = q.add(&t);
        }
        q
    }

    /// True if `d` divides `self` exactly.
    pub fn divides(&self, d: &MultiPoly) -> bool {
        if d.is_zero() {
            return self.is_zero();
        }
        let mut rem = self.clone();
        let dm = d.leading_term().unwrap().0.clone();
        let dc = d.leading_coeff();
        while !rem.is_zero() {
            let (rm, rc) = {
                let (m, c) = rem.leading_term().unwrap();
                (m.clone(), c.clone())
            };
            let qm = match rm.div(&dm) {
                Some(m) => m,
                None => return false,
            };
            let t = MultiPoly::from_terms(self.nvars, [(qm, rc / &dc)]);
            rem = rem.sub(&t.mul(d));
        }
        true
    }

    /// Degree in a single variable.
    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|m| m.0[i]).max().unwrap_or(0)
    }

    /// True if the polynomial does not involve variable `i`.
    pub fn is_free_of(&self, i: usize) -> bool {
        self.terms.keys().all(|m| m.0[i] == 0)
    }

    /// Coefficient of `x_i^k`, as a polynomial in the remaining variables
    /// (same ambient variable set, exponent of `x_i` zeroed).
    pub fn coeff_of(&self, i: usize, k: u32) -> MultiPoly {
        let mut out = MultiPoly::zero(self.nvars);
        for (m, c) in &self.terms {
            if m.0[i] == k {
                let mut e = m.clone();
                e.0[i] = 0;
                out.terms.insert(e, c.clone());
            }
        }
        out
    }

    /// Multiply by `x_i^k`.
    pub fn mul_var_pow(&self, i: usize, k: u32) -> MultiPoly {
        let mut out = MultiPoly::zero(self.nvars);
        for (m, c) in &self.terms {
            let mut e = m.clone();
            e.0[i] += k;
            out.terms.insert(e, c.clone());
        }
        out
    }

    /// Partial derivative with respect to `x_{i+1}`.
    pub fn derivative(&self, i: usize) -> MultiPoly {
        assert!(i < self.nvars, "variable index out of range");
        let mut out = MultiPoly::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e > 0 {
                let mut em = m.clone();
                em.0[i] = e - 1;
                out.add_term(em, c * BigRational::from(BigInt::from(e)));
            }
        }
        out
    }

    /// Formal antiderivative in `x_{i+1}` with zero constant term in that
    /// variable: the derivative of the result is `self`.
    pub fn integrate(&self, i: usize) -> MultiPoly {
        assert!(i < self.nvars, "variable index out of range");
        let mut out = MultiPoly::zero(self.nvars);
        for (m, c) in &self.terms {
            let mut em = m.clone();
            em.0[i] += 1;
            out.terms
                .insert(em, c / BigRational::from(BigInt::from(m.0[i] + 1)));
        }
        out
    }

    /// Substitute `images[i]` for `x_{i+1}`. Images must all share a variable
    /// count, which becomes the variable count of the result.
    pub fn substitute(&self, images: &[MultiPoly]) -> MultiPoly {
        assert_eq!(images.len(), self.nvars, "substitution arity mismatch");
        let out_nvars = images.first().map(|p| p.nvars).unwrap_or(0);
        let mut out = MultiPoly::zero(out_nvars);
        for (m, c) in &self.terms {
            let mut t = MultiPoly::constant(out_nvars, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t = t.mul(&images[i].pow(e));
                }
            }
            out = out.add(&t);
        }
        out
    }

    /// Monomial-wise coefficient map keyed by exponent vector, for linear
    /// algebra over the rationals.
    pub fn coeff_map(&self) -> &BTreeMap<Monomial, BigRational> {
        &self.terms
    }
}

/// Potential of a closed plane field: returns `h` with dh/du = f and
/// dh/dv = g, normalized to zero constant term. Fails when the closedness
/// condition df/dv = dg/du does not hold.
pub fn potential(f: &MultiPoly, g: &MultiPoly, u: usize, v: usize) -> Result<MultiPoly, crate::ArithError> {
    assert_eq!(f.nvars, g.nvars, "variable count mismatch");
    if f.derivative(v) != g.derivative(u) {
        return Err(crate::ArithError::NotClosedPair);
    }
    // Integrate f along u, then fix up the v-dependence.
    let h1 = f.integrate(u);
    let rest = g.sub(&h1.derivative(v));
    debug_assert!(rest.is_free_of(u));
    let h = h1.add(&rest.integrate(v));
    let h = h.sub(&MultiPoly::constant(h.nvars, h.constant_term()));
    debug_assert_eq!(h.derivative(u), *f);
    debug_assert_eq!(h.derivative(v), *g);
    Ok(h)
}

fn fmt_rational(c: &BigRational) -> String {
    if c.denom().is_one() {
        format!("{}", c.numer())
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

impl MultiPoly {
    /// Canonical string: terms in descending grlex order, explicit `*` and
    /// `^`, coefficients printed as `p/q`.
    pub fn to_canonical_string(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (idx, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if idx == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mut factors: Vec<String> = Vec::new();
            if !abs.is_one() || m.is_one() {
                factors.push(fmt_rational(&abs));
            }
            for (i, &e) in m.0.iter().enumerate() {
                if e == 1 {
                    factors.push(format!("x{}", i + 1));
                } else if e > 1 {
                    factors.push(format!("x{}^{}", i + 1, e));
                }
            }
            out.push_str(&factors.join("*"));
        }
        out
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_canonical_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> MultiPoly {
        MultiPoly::var(3, i)
    }

    #[test]
    fn additive_cancellation() {
        let p = x(0).add(&MultiPoly::one(3));
        let q = x(0).neg();
        assert_eq!(p.add(&q), MultiPoly::one(3));
    }

    #[test]
    fn difference_of_squares() {
        let lhs = x(0).sub(&x(1)).mul(&x(0).add(&x(1)));
        let rhs = x(0).pow(2).sub(&x(1).pow(2));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn absorbing_zero() {
        let p = x(0).mul(&x(1)).add(&MultiPoly::from_int(3, 7));
        assert!(p.mul(&MultiPoly::zero(3)).is_zero());
    }

    #[test]
    fn exact_division() {
        let p = x(0).pow(2).sub(&x(1).pow(2));
        let d = x(0).sub(&x(1));
        assert_eq!(p.div_exact(&d), x(0).add(&x(1)));
        assert!(p.divides(&d));
        assert!(!x(0).divides(&x(1)));
    }

    #[test]
    fn derivative_power_rule() {
        // d/dx1 (x1^2 x2) = 2 x1 x2
        let p = x(0).pow(2).mul(&x(1));
        let expect = x(0).mul(&x(1)).scale(&BigRational::from(BigInt::from(2)));
        assert_eq!(p.derivative(0), expect);
        assert!(x(0).derivative(1).is_zero());
    }

    #[test]
    fn integrate_monomials() {
        // int x3 dx3 = x3^2/2
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        assert_eq!(x(2).integrate(2), x(2).pow(2).scale(&half));
        assert_eq!(MultiPoly::one(3).integrate(1), x(1));
        assert_eq!(x(1).mul(&x(2)).integrate(2), x(1).mul(&x(2).pow(2)).scale(&half));
        // derivative of integral is the identity
        let p = x(0).pow(2).mul(&x(2)).add(&x(1));
        assert_eq!(p.integrate(2).derivative(2), p);
    }

    #[test]
    fn potential_examples() {
        // f = v, g = u (u = x1, v = x2) -> h = u v
        let h = potential(&x(1), &x(0), 0, 1).unwrap();
        assert_eq!(h, x(0).mul(&x(1)));
        // f = 2u, g = 3v^2 -> h = u^2 + v^3
        let f = x(0).scale(&BigRational::from(BigInt::from(2)));
        let g = x(1).pow(2).scale(&BigRational::from(BigInt::from(3)));
        assert_eq!(potential(&f, &g, 0, 1).unwrap(), x(0).pow(2).add(&x(1).pow(3)));
        // f = 1, g = 0 -> h = u
        assert_eq!(potential(&MultiPoly::one(3), &MultiPoly::zero(3), 0, 1).unwrap(), x(0));
        // closedness violated
        assert!(potential(&x(1), &x(1), 0, 1).is_err());
    }

    #[test]
    fn canonical_printing() {
        let p = x(0).pow(2).sub(&x(1).scale(&BigRational::new(BigInt::from(1), BigInt::from(2))));
        assert_eq!(p.to_canonical_string(), "x1^2 - 1/2*x2");
        assert_eq!(MultiPoly::zero(3).to_canonical_string(), "0");
    }
}
