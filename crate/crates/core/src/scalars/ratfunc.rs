//! Reduced fractions of integer polynomials.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::poly::{gcd, Exp, Poly, NVARS, ZERO_EXP};

/// A rational function `num/den` over Q in the polynomial variables.
///
/// Invariant: `gcd(num, den) = 1` in Z[x], `den` has a positive leading
/// coefficient, and zero is `0/1`. Equal field elements therefore have
/// identical representations.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl RatFunc {
    pub fn zero() -> Self {
        RatFunc { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> Self {
        RatFunc { num: Poly::one(), den: Poly::one() }
    }

    pub fn from_int(n: i64) -> Self {
        RatFunc { num: Poly::constant(BigInt::from(n)), den: Poly::one() }
    }

    pub fn from_rational(r: &BigRational) -> Self {
        Self::new(Poly::constant(r.numer().clone()), Poly::constant(r.denom().clone()))
    }

    pub fn from_poly(p: Poly) -> Self {
        RatFunc { num: p, den: Poly::one() }
    }

    /// Laurent monomial `c * prod x_i^{e_i}` with possibly negative exponents.
    pub fn laurent_monomial(c: &BigRational, exps: &[i64; NVARS]) -> Self {
        let mut pe: Exp = ZERO_EXP;
        let mut ne: Exp = ZERO_EXP;
        for i in 0..NVARS {
            if exps[i] >= 0 {
                pe[i] = exps[i] as u32;
            } else {
                ne[i] = (-exps[i]) as u32;
            }
        }
        Self::new(
            Poly::monomial(pe, c.numer().clone()),
            Poly::monomial(ne, c.denom().clone()),
        )
    }

    /// Builds and reduces `num/den`. Panics on a zero denominator.
    pub fn new(num: Poly, den: Poly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return Self::zero();
        }
        let g = gcd(&num, &den);
        let (mut n, mut d) = if g.is_one() {
            (num, den)
        } else {
            (num.div_exact(&g).unwrap(), den.div_exact(&g).unwrap())
        };
        if d.leading_coeff_sign() == std::cmp::Ordering::Less {
            n = n.neg();
            d = d.neg();
        }
        RatFunc { num: n, den: d }
    }

    pub fn numer(&self) -> &Poly {
        &self.num
    }

    pub fn denom(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        match (self.num.as_constant(), self.den.as_constant()) {
            (Some(n), Some(d)) => Some(BigRational::new(n, d)),
            _ => None,
        }
    }

    pub fn has_var(&self, v: usize) -> bool {
        self.num.has_var(v) || self.den.has_var(v)
    }

    pub fn neg(&self) -> Self {
        RatFunc { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn add(&self, o: &Self) -> Self {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            return Self::new(self.num.add(&o.num), self.den.clone());
        }
        if self.den.is_constant() && o.den.is_constant() {
            let n = self.num.mul(&o.den).add(&o.num.mul(&self.den));
            return Self::new(n, self.den.mul(&o.den));
        }
        let g = gcd(&self.den, &o.den);
        let b1 = self.den.div_exact(&g).unwrap();
        let d1 = o.den.div_exact(&g).unwrap();
        let n = self.num.mul(&d1).add(&o.num.mul(&b1));
        if n.is_zero() {
            return Self::zero();
        }
        let den = b1.mul(&d1).mul(&g);
        if g.is_one() {
            let mut r = RatFunc { num: n, den };
            r.fix_sign();
            return r;
        }
        let h = gcd(&n, &g);
        if h.is_one() {
            let mut r = RatFunc { num: n, den };
            r.fix_sign();
            r
        } else {
            let mut r = RatFunc { num: n.div_exact(&h).unwrap(), den: den.div_exact(&h).unwrap() };
            r.fix_sign();
            r
        }
    }

    fn fix_sign(&mut self) {
        if self.den.leading_coeff_sign() == std::cmp::Ordering::Less {
            self.num = self.num.neg();
            self.den = self.den.neg();
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        if o.is_one() {
            return self.clone();
        }
        if self.is_one() {
            return o.clone();
        }
        let g1 = gcd(&self.num, &o.den);
        let g2 = gcd(&o.num, &self.den);
        let n1 = self.num.div_exact(&g1).unwrap();
        let d2 = o.den.div_exact(&g1).unwrap();
        let n2 = o.num.div_exact(&g2).unwrap();
        let d1 = self.den.div_exact(&g2).unwrap();
        let mut r = RatFunc { num: n1.mul(&n2), den: d1.mul(&d2) };
        r.fix_sign();
        r
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let mut r = RatFunc { num: self.den.clone(), den: self.num.clone() };
        r.fix_sign();
        Some(r)
    }

    pub fn div(&self, o: &Self) -> Option<Self> {
        o.inv().map(|i| self.mul(&i))
    }

    pub fn pow(&self, n: i64) -> Self {
        if n >= 0 {
            let mut r = RatFunc { num: self.num.pow(n as u32), den: self.den.pow(n as u32) };
            r.fix_sign();
            r
        } else {
            self.inv().expect("negative power of zero").pow(-n)
        }
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            let n = if self.num.total_terms() > 1 { format!("({})", self.num) } else { self.num.to_string() };
            let d = if self.den.total_terms() > 1 { format!("({})", self.den) } else { self.den.to_string() };
            write!(f, "{}/{}", n, d)
        }
    }
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl Zero for RatFunc {
    fn zero() -> Self {
        RatFunc::zero()
    }
    fn is_zero(&self) -> bool {
        RatFunc::is_zero(self)
    }
}

impl std::ops::Add for RatFunc {
    type Output = RatFunc;
    fn add(self, o: RatFunc) -> RatFunc {
        RatFunc::add(&self, &o)
    }
}

impl One for RatFunc {
    fn one() -> Self {
        RatFunc::one()
    }
}

impl std::ops::Mul for RatFunc {
    type Output = RatFunc;
    fn mul(self, o: RatFunc) -> RatFunc {
        RatFunc::mul(&self, &o)
    }
}
