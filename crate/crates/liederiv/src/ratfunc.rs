//! Normalized rational functions: the scalar field K(x1,...,xn).

use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;

use crate::gcd::poly_gcd;
use crate::poly::MultiPoly;
use crate::ArithError;

/// Quotient of two polynomials in lowest terms with monic denominator.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RatFunc {
    num: MultiPoly,
    den: MultiPoly,
}

impl RatFunc {
    /// Build and normalize `num/den`. Errors on a zero denominator.
    pub fn new(num: MultiPoly, den: MultiPoly) -> Result<RatFunc, ArithError> {
        assert_eq!(num.nvars, den.nvars, "variable count mismatch");
        if den.is_zero() {
            return Err(ArithError::ZeroDenominator);
        }
        if num.is_zero() {
            return Ok(RatFunc {
                num,
                den: MultiPoly::one(den.nvars),
            });
        }
        // Fast path: constant denominator.
        if let Some(c) = den.as_constant() {
            return Ok(RatFunc {
                num: num.scale(&c.recip()),
                den: MultiPoly::one(den.nvars),
            });
        }
        let g = poly_gcd(&num, &den)?;
        let (num, den) = if g.is_constant() {
            (num, den)
        } else {
            (num.div_exact(&g), den.div_exact(&g))
        };
        let lc = den.leading_coeff();
        Ok(RatFunc {
            num: num.scale(&lc.recip()),
            den: den.scale(&lc.recip()),
        })
    }

    pub fn from_poly(p: MultiPoly) -> RatFunc {
        let n = p.nvars;
        RatFunc {
            num: p,
            den: MultiPoly::one(n),
        }
    }

    pub fn zero(nvars: usize) -> RatFunc {
        RatFunc::from_poly(MultiPoly::zero(nvars))
    }

    pub fn one(nvars: usize) -> RatFunc {
        RatFunc::from_poly(MultiPoly::one(nvars))
    }

    pub fn constant(nvars: usize, c: BigRational) -> RatFunc {
        RatFunc::from_poly(MultiPoly::constant(nvars, c))
    }

    pub fn var(nvars: usize, i: usize) -> RatFunc {
        RatFunc::from_poly(MultiPoly::var(nvars, i))
    }

    pub fn num(&self) -> &MultiPoly {
        &self.num
    }

    pub fn den(&self) -> &MultiPoly {
        &self.den
    }

    pub fn nvars(&self) -> usize {
        self.num.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant()
    }

    /// The constant value if this is an element of the ground field K.
    pub fn as_constant(&self) -> Option<BigRational> {
        if self.num.is_constant() && self.den.is_constant() {
            Some(self.num.constant_term())
        } else {
            None
        }
    }

    pub fn add(&self, other: &RatFunc) -> RatFunc {
        let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
        let den = self.den.mul(&other.den);
        RatFunc::new(num, den).expect("nonzero denominator")
    }

    pub fn sub(&self, other: &RatFunc) -> RatFunc {
        let num = self.num.mul(&other.den).sub(&other.num.mul(&self.den));
        let den = self.den.mul(&other.den);
        RatFunc::new(num, den).expect("nonzero denominator")
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &RatFunc) -> RatFunc {
        RatFunc::new(self.num.mul(&other.num), self.den.mul(&other.den))
            .expect("nonzero denominator")
    }

    pub fn div(&self, other: &RatFunc) -> Result<RatFunc, ArithError> {
        if other.is_zero() {
            return Err(ArithError::ZeroDenominator);
        }
        RatFunc::new(self.num.mul(&other.den), self.den.mul(&other.num))
    }

    pub fn recip(&self) -> Result<RatFunc, ArithError> {
        RatFunc::one(self.nvars()).div(self)
    }

    pub fn scale(&self, c: &BigRational) -> RatFunc {
        if c.is_zero() {
            return RatFunc::zero(self.nvars());
        }
        RatFunc {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub fn pow(&self, e: u32) -> RatFunc {
        let mut out = RatFunc::one(self.nvars());
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Exact partial derivative with respect to `x_{i+1}`, via the quotient
    /// rule D(a/b) = (D(a) b - a D(b)) / b^2.
    pub fn derivative(&self, i: usize) -> RatFunc {
        assert!(i < self.nvars(), "variable index out of range");
        if self.den.is_constant() {
            return RatFunc {
                num: self.num.derivative(i).scale(&self.den.constant_term().recip()),
                den: MultiPoly::one(self.nvars()),
            };
        }
        let num = self
            .num
            .derivative(i)
            .mul(&self.den)
            .sub(&self.num.mul(&self.den.derivative(i)));
        let den = self.den.mul(&self.den);
        RatFunc::new(num, den).expect("nonzero denominator")
    }

    /// Substitute polynomial images for the variables (applied to numerator
    /// and denominator). Errors if the denominator vanishes identically.
    pub fn substitute(&self, images: &[MultiPoly]) -> Result<RatFunc, ArithError> {
        RatFunc::new(self.num.substitute(images), self.den.substitute(images))
    }

    /// Canonical string: a plain polynomial when the denominator is 1,
    /// otherwise `(num)/(den)`.
    pub fn to_canonical_string(&self) -> String {
        if self.den.is_constant() {
            self.num.to_canonical_string()
        } else {
            format!(
                "({})/({})",
                self.num.to_canonical_string(),
                self.den.to_canonical_string()
            )
        }
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_canonical_string())
    }
}
