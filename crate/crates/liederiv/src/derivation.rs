//! Derivations of K(x1,...,xn): vector fields sum f_i d/dx_i with
//! rational-function coefficients, their Lie bracket, and push-forward under
//! triangular polynomial automorphisms.

use std::fmt;

use num_rational::BigRational;

use crate::poly::MultiPoly;
use crate::ratfunc::RatFunc;
use crate::{ArithError, LieError};

/// A derivation sum_i coeffs[i] * d/dx_{i+1}.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Derivation {
    coeffs: Vec<RatFunc>,
}

impl Derivation {
    pub fn new(coeffs: Vec<RatFunc>) -> Derivation {
        assert!(!coeffs.is_empty(), "derivation needs at least one variable");
        let n = coeffs[0].nvars();
        assert!(
            coeffs.iter().all(|c| c.nvars() == n),
            "coefficient variable counts differ"
        );
        assert_eq!(coeffs.len(), n, "coefficient vector length must equal nvars");
        Derivation { coeffs }
    }

    pub fn zero(nvars: usize) -> Derivation {
        Derivation::new(vec![RatFunc::zero(nvars); nvars])
    }

    /// The coordinate derivation d/dx_{i+1}.
    pub fn partial(nvars: usize, i: usize) -> Derivation {
        let mut coeffs = vec![RatFunc::zero(nvars); nvars];
        coeffs[i] = RatFunc::one(nvars);
        Derivation::new(coeffs)
    }

    pub fn nvars(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[RatFunc] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &RatFunc {
        &self.coeffs[i]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_polynomial(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_polynomial())
    }

    /// Apply the derivation to a rational function.
    pub fn apply(&self, r: &RatFunc) -> RatFunc {
        assert_eq!(self.nvars(), r.nvars(), "dimension mismatch");
        let mut out = RatFunc::zero(self.nvars());
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                out = out.add(&c.mul(&r.derivative(i)));
            }
        }
        out
    }

    /// Lie bracket [self, other]: coefficient-wise
    /// self(other_j) - other(self_j).
    pub fn bracket(&self, other: &Derivation) -> Derivation {
        assert_eq!(self.nvars(), other.nvars(), "dimension mismatch");
        let coeffs = (0..self.nvars())
            .map(|j| {
                self.apply(&other.coeffs[j])
                    .sub(&other.apply(&self.coeffs[j]))
            })
            .collect();
        Derivation::new(coeffs)
    }

    /// Multiply by a rational function: r * D.
    pub fn scale(&self, r: &RatFunc) -> Derivation {
        assert_eq!(self.nvars(), r.nvars(), "dimension mismatch");
        Derivation::new(self.coeffs.iter().map(|c| c.mul(r)).collect())
    }

    pub fn scale_k(&self, c: &BigRational) -> Derivation {
        Derivation::new(self.coeffs.iter().map(|f| f.scale(c)).collect())
    }

    pub fn add(&self, other: &Derivation) -> Derivation {
        assert_eq!(self.nvars(), other.nvars(), "dimension mismatch");
        Derivation::new(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.add(b))
                .collect(),
        )
    }

    pub fn sub(&self, other: &Derivation) -> Derivation {
        assert_eq!(self.nvars(), other.nvars(), "dimension mismatch");
        Derivation::new(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.sub(b))
                .collect(),
        )
    }

    pub fn neg(&self) -> Derivation {
        Derivation::new(self.coeffs.iter().map(|c| c.neg()).collect())
    }

    /// Push-forward (conjugation) by an automorphism: the result D' satisfies
    /// D'(r) = phi(D(phi^{-1}(r))).
    pub fn pushforward(&self, phi: &Automorphism) -> Derivation {
        assert_eq!(self.nvars(), phi.nvars(), "dimension mismatch");
        let coeffs = (0..self.nvars())
            .map(|i| {
                let pre = RatFunc::from_poly(phi.inverse_images()[i].clone());
                self.apply(&pre)
                    .substitute(phi.images())
                    .expect("automorphism images keep denominators nonzero")
            })
            .collect();
        Derivation::new(coeffs)
    }

    /// Canonical string in the CLI grammar, e.g. `x3*d1 + d2`.
    pub fn to_canonical_string(&self) -> String {
        let mut parts: Vec<(bool, String)> = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if c.is_polynomial() {
                for (m, coeff) in c.num().coeff_map().iter().rev() {
                    let neg = coeff < &BigRational::from_integer(0.into());
                    let abs = if neg { -coeff.clone() } else { coeff.clone() };
                    let mut factors: Vec<String> = Vec::new();
                    if !num_traits::One::is_one(&abs) {
                        factors.push(crate::classify::fmt_big_rational(&abs));
                    }
                    for (v, &e) in m.0.iter().enumerate() {
                        if e == 1 {
                            factors.push(format!("x{}", v + 1));
                        } else if e > 1 {
                            factors.push(format!("x{}^{}", v + 1, e));
                        }
                    }
                    factors.push(format!("d{}", i + 1));
                    parts.push((neg, factors.join("*")));
                }
            } else {
                parts.push((false, format!("{}*d{}", c.to_canonical_string(), i + 1)));
            }
        }
        if parts.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (idx, (neg, s)) in parts.iter().enumerate() {
            if idx == 0 {
                if *neg {
                    out.push('-');
                }
            } else {
                out.push_str(if *neg { " - " } else { " + " });
            }
            out.push_str(s);
        }
        out
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_canonical_string())
    }
}

/// Triangular polynomial automorphism x_i -> x_i + g_i(x_{i+1},...,x_n),
/// with g_n constant. The inverse is computed by back-substitution.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Automorphism {
    images: Vec<MultiPoly>,
    inverse_images: Vec<MultiPoly>,
}

impl Automorphism {
    /// Accepts only triangular substitutions; errors otherwise or when the
    /// computed inverse fails the round-trip check.
    pub fn new(images: Vec<MultiPoly>) -> Result<Automorphism, LieError> {
        let n = images.len();
        if n == 0 {
            return Err(LieError::Precondition("empty automorphism".into()));
        }
        for p in &images {
            if p.nvars != n {
                return Err(LieError::Precondition(
                    "automorphism image variable count mismatch".into(),
                ));
            }
        }
        // Triangular shape: images[i] = x_{i+1} + g_i with g_i free of
        // x_1..x_{i+1}.
        for (i, p) in images.iter().enumerate() {
            let g = p.sub(&MultiPoly::var(n, i));
            for j in 0..=i {
                if !g.is_free_of(j) {
                    return Err(LieError::Precondition(format!(
                        "image of x{} is not triangular",
                        i + 1
                    )));
                }
            }
        }
        // Back-substitution: inv_n = x_n - g_n, then
        // inv_i = x_i - g_i(inv_{i+1},...,inv_n).
        let mut inverse_images = vec![MultiPoly::zero(n); n];
        for i in (0..n).rev() {
            let g = images[i].sub(&MultiPoly::var(n, i));
            let mut subst: Vec<MultiPoly> = (0..n).map(|j| MultiPoly::var(n, j)).collect();
            for (j, inv) in inverse_images.iter().enumerate().skip(i + 1) {
                subst[j] = inv.clone();
            }
            inverse_images[i] = MultiPoly::var(n, i).sub(&g.substitute(&subst));
        }
        let phi = Automorphism {
            images,
            inverse_images,
        };
        if !phi.round_trips() {
            return Err(LieError::Internal(
                "automorphism inverse failed round-trip check".into(),
            ));
        }
        Ok(phi)
    }

    pub fn identity(nvars: usize) -> Automorphism {
        let images = (0..nvars).map(|i| MultiPoly::var(nvars, i)).collect();
        Automorphism::new(images).expect("identity is triangular")
    }

    pub fn nvars(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[MultiPoly] {
        &self.images
    }

    pub fn inverse_images(&self) -> &[MultiPoly] {
        &self.inverse_images
    }

    /// Apply the substitution x_i -> images[i] to a rational function.
    pub fn apply(&self, r: &RatFunc) -> Result<RatFunc, ArithError> {
        r.substitute(&self.images)
    }

    fn round_trips(&self) -> bool {
        let n = self.nvars();
        (0..n).all(|i| {
            self.images[i].substitute(&self.inverse_images) == MultiPoly::var(n, i)
                && self.inverse_images[i].substitute(&self.images) == MultiPoly::var(n, i)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn d(i: usize) -> Derivation {
        Derivation::partial(3, i)
    }

    fn xr(i: usize) -> RatFunc {
        RatFunc::var(3, i)
    }

    #[test]
    fn apply_quotient_rule() {
        // d1 applied to x1/(x1+1) = 1/(x1+1)^2
        let r = RatFunc::new(
            MultiPoly::var(3, 0),
            MultiPoly::var(3, 0).add(&MultiPoly::one(3)),
        )
        .unwrap();
        let out = d(0).apply(&r);
        let expect = RatFunc::new(
            MultiPoly::one(3),
            MultiPoly::var(3, 0).add(&MultiPoly::one(3)).pow(2),
        )
        .unwrap();
        assert_eq!(out, expect);
        // x1 d1 applied to x1 = x1
        assert_eq!(d(0).scale(&xr(0)).apply(&xr(0)), xr(0));
        assert!(d(1).apply(&xr(0)).is_zero());
    }

    #[test]
    fn bracket_examples() {
        // [d3, x3 d1] = d1
        assert_eq!(d(2).bracket(&d(0).scale(&xr(2))), d(0));
        // [x1 d1, x1 d2] = x1 d2  (expand via the scaled-bracket identity)
        let lhs = d(0).scale(&xr(0)).bracket(&d(1).scale(&xr(0)));
        assert_eq!(lhs, d(1).scale(&xr(0)));
        // antisymmetry: [D, D] = 0
        let dd = d(0).scale(&xr(2)).add(&d(1));
        assert!(dd.bracket(&dd).is_zero());
    }

    #[test]
    fn scale_examples() {
        assert_eq!(d(0).scale(&xr(2)), {
            let mut c = vec![RatFunc::zero(3); 3];
            c[0] = xr(2);
            Derivation::new(c)
        });
        assert!(d(1).scale(&RatFunc::zero(3)).is_zero());
        // (1/x1) * (x1 d2) = d2
        let inv = RatFunc::new(MultiPoly::one(3), MultiPoly::var(3, 0)).unwrap();
        assert_eq!(d(1).scale(&xr(0)).scale(&inv), d(1));
    }

    #[test]
    fn triangular_automorphism_inverse() {
        // x1 -> x1 + x3^2
        let mut images: Vec<MultiPoly> = (0..3).map(|i| MultiPoly::var(3, i)).collect();
        images[0] = images[0].add(&MultiPoly::var(3, 2).pow(2));
        let phi = Automorphism::new(images).unwrap();
        assert_eq!(
            phi.inverse_images()[0],
            MultiPoly::var(3, 0).sub(&MultiPoly::var(3, 2).pow(2))
        );

        // pushforward(d1, phi) = d1
        assert_eq!(d(0).pushforward(&phi), d(0));
        // pushforward(d3, phi) = -2 x3 d1 + d3
        let expect = d(0)
            .scale(&xr(2))
            .scale_k(&BigRational::from(BigInt::from(-2)))
            .add(&d(2));
        assert_eq!(d(2).pushforward(&phi), expect);
        // identity automorphism is neutral
        let id = Automorphism::identity(3);
        let dd = d(0).scale(&xr(1)).add(&d(2));
        assert_eq!(dd.pushforward(&id), dd);
    }

    #[test]
    fn non_triangular_rejected() {
        // x1 -> x1 + x1^2 depends on x1 itself
        let mut images: Vec<MultiPoly> = (0..3).map(|i| MultiPoly::var(3, i)).collect();
        images[0] = images[0].add(&MultiPoly::var(3, 0).pow(2));
        assert!(Automorphism::new(images).is_err());
    }

    #[test]
    fn nested_triangular_inverse() {
        // x1 -> x1 + x2 x3, x2 -> x2 + x3^2 + 1, x3 -> x3 + 2
        let n = 3;
        let images = vec![
            MultiPoly::var(n, 0).add(&MultiPoly::var(n, 1).mul(&MultiPoly::var(n, 2))),
            MultiPoly::var(n, 1)
                .add(&MultiPoly::var(n, 2).pow(2))
                .add(&MultiPoly::one(n)),
            MultiPoly::var(n, 2).add(&MultiPoly::from_int(n, 2)),
        ];
        let phi = Automorphism::new(images).unwrap();
        // round_trips() ran in the constructor; also check a pushforward
        // preserves brackets on a sample pair.
        let a = d(1).scale(&xr(2));
        let b = d(2);
        let lhs = a.bracket(&b).pushforward(&phi);
        let rhs = a.pushforward(&phi).bracket(&b.pushforward(&phi));
        assert_eq!(lhs, rhs);
    }
}
