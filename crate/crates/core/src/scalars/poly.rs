//! Sparse multivariate polynomials with integer coefficients.
//!
//! Terms are kept sorted in descending lexicographic order of their exponent
//! vectors (variable 0 most significant), with no zero coefficients. This
//! makes the representation canonical, so structural equality is polynomial
//! equality.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Number of polynomial variables in the coefficient field.
pub const NVARS: usize = 6;

/// Exponent vector of a monomial.
pub type Exp = [u32; NVARS];

pub const ZERO_EXP: Exp = [0; NVARS];

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: Vec<(Exp, BigInt)>,
}

fn exp_add(a: &Exp, b: &Exp) -> Exp {
    let mut r = *a;
    for i in 0..NVARS {
        r[i] += b[i];
    }
    r
}

fn exp_divides(a: &Exp, b: &Exp) -> bool {
    (0..NVARS).all(|i| a[i] <= b[i])
}

fn exp_sub(a: &Exp, b: &Exp) -> Exp {
    let mut r = *a;
    for i in 0..NVARS {
        r[i] -= b[i];
    }
    r
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            Poly { terms: vec![(ZERO_EXP, c)] }
        }
    }

    pub fn monomial(exp: Exp, c: BigInt) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            Poly { terms: vec![(exp, c)] }
        }
    }

    pub fn var(v: usize) -> Self {
        let mut e = ZERO_EXP;
        e[v] = 1;
        Self::monomial(e, BigInt::one())
    }

    /// Builds a polynomial from arbitrary (possibly repeated, unsorted) terms.
    pub fn from_terms(mut terms: Vec<(Exp, BigInt)>) -> Self {
        terms.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        let mut out: Vec<(Exp, BigInt)> = Vec::with_capacity(terms.len());
        for (e, c) in terms {
            match out.last_mut() {
                Some((le, lc)) if *le == e => *lc += c,
                _ => out.push((e, c)),
            }
        }
        out.retain(|(_, c)| !c.is_zero());
        Poly { terms: out }
    }

    pub fn terms(&self) -> &[(Exp, BigInt)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0 == ZERO_EXP && self.terms[0].1.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0 == ZERO_EXP)
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    /// Constant term value if the polynomial is constant.
    pub fn as_constant(&self) -> Option<BigInt> {
        if self.terms.is_empty() {
            Some(BigInt::zero())
        } else if self.is_constant() {
            Some(self.terms[0].1.clone())
        } else {
            None
        }
    }

    pub fn leading(&self) -> Option<&(Exp, BigInt)> {
        self.terms.first()
    }

    pub fn leading_coeff_sign(&self) -> Ordering {
        match self.terms.first() {
            None => Ordering::Equal,
            Some((_, c)) => c.cmp(&BigInt::zero()),
        }
    }

    pub fn degree(&self, v: usize) -> u32 {
        self.terms.iter().map(|(e, _)| e[v]).max().unwrap_or(0)
    }

    pub fn min_degree(&self, v: usize) -> u32 {
        self.terms.iter().map(|(e, _)| e[v]).min().unwrap_or(0)
    }

    pub fn has_var(&self, v: usize) -> bool {
        self.terms.iter().any(|(e, _)| e[v] > 0)
    }

    pub fn vars(&self) -> Vec<usize> {
        (0..NVARS).filter(|&v| self.has_var(v)).collect()
    }

    pub fn neg(&self) -> Self {
        Poly {
            terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.terms, &other.terms);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let c = &a[i].1 + &b[j].1;
                    if !c.is_zero() {
                        out.push((a[i].0, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Poly { terms: out }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(e, x)| (*e, x * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, exp: &Exp, c: &BigInt) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(e, x)| (exp_add(e, exp), x * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        if other.terms.len() == 1 {
            return self.mul_monomial(&other.terms[0].0, &other.terms[0].1);
        }
        if self.terms.len() == 1 {
            return other.mul_monomial(&self.terms[0].0, &self.terms[0].1);
        }
        let mut acc = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                acc.push((exp_add(ea, eb), ca * cb));
            }
        }
        Self::from_terms(acc)
    }

    pub fn pow(&self, mut n: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Exact division; `None` if `divisor` does not divide `self` in Z[x].
    pub fn div_exact(&self, divisor: &Self) -> Option<Self> {
        if divisor.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Self::zero());
        }
        let (le, lc) = divisor.terms[0].clone();
        if divisor.terms.len() == 1 {
            let mut out = Vec::with_capacity(self.terms.len());
            for (e, c) in &self.terms {
                if !exp_divides(&le, e) {
                    return None;
                }
                let (q, r) = c.div_rem(&lc);
                if !r.is_zero() {
                    return None;
                }
                out.push((exp_sub(e, &le), q));
            }
            return Some(Poly { terms: out });
        }
        for v in 0..NVARS {
            if divisor.degree(v) > self.degree(v) {
                return None;
            }
        }
        let mut rem = self.clone();
        let mut quot: Vec<(Exp, BigInt)> = Vec::new();
        while let Some((re, rc)) = rem.terms.first().cloned() {
            if !exp_divides(&le, &re) {
                return None;
            }
            let (q, r) = rc.div_rem(&lc);
            if !r.is_zero() {
                return None;
            }
            let qe = exp_sub(&re, &le);
            rem = rem.sub(&divisor.mul_monomial(&qe, &q));
            quot.push((qe, q));
        }
        Some(Poly { terms: quot })
    }

    /// Gcd of all integer coefficients (positive), zero for the zero polynomial.
    pub fn int_content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for (_, c) in &self.terms {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    /// Componentwise minimum exponent over all terms.
    pub fn min_exp(&self) -> Exp {
        let mut m = match self.terms.first() {
            None => return ZERO_EXP,
            Some((e, _)) => *e,
        };
        for (e, _) in &self.terms[1..] {
            for i in 0..NVARS {
                m[i] = m[i].min(e[i]);
            }
        }
        m
    }

    /// Coefficients with respect to variable `v`, index = degree in `v`.
    pub fn to_univariate(&self, v: usize) -> Vec<Poly> {
        let d = self.degree(v) as usize;
        let mut buckets: Vec<Vec<(Exp, BigInt)>> = vec![Vec::new(); d + 1];
        for (e, c) in &self.terms {
            let k = e[v] as usize;
            let mut e2 = *e;
            e2[v] = 0;
            buckets[k].push((e2, c.clone()));
        }
        // Each bucket inherits the global sort order restricted to the other variables.
        buckets.into_iter().map(Self::from_terms).collect()
    }

    pub fn from_univariate(coeffs: &[Poly], v: usize) -> Self {
        let mut terms = Vec::new();
        for (k, p) in coeffs.iter().enumerate() {
            for (e, c) in &p.terms {
                let mut e2 = *e;
                e2[v] += k as u32;
                terms.push((e2, c.clone()));
            }
        }
        Self::from_terms(terms)
    }

    /// Substitutes the value `x` for variable `v` (integer evaluation at 1 used for limits).
    pub fn eval_var_int(&self, v: usize, x: &BigInt) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (e, c) in &self.terms {
            let mut e2 = *e;
            e2[v] = 0;
            terms.push((e2, c * num_traits::pow(x.clone(), e[v] as usize)));
        }
        Self::from_terms(terms)
    }

    /// Canonical sign: leading coefficient positive.
    pub fn normalize_sign(self) -> Self {
        if self.leading_coeff_sign() == Ordering::Less {
            self.neg()
        } else {
            self
        }
    }

    pub fn total_terms(&self) -> usize {
        self.terms.len()
    }
}

// ---------------------------------------------------------------------------
// gcd

const PRIME: u64 = (1u64 << 61) - 1;

fn mulmod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % PRIME as u128) as u64
}

fn powmod(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a);
        }
        a = mulmod(a, a);
        e >>= 1;
    }
    r
}

fn invmod(a: u64) -> u64 {
    powmod(a, PRIME - 2)
}

fn big_mod(c: &BigInt) -> u64 {
    let p = BigInt::from(PRIME);
    let r = c.mod_floor(&p);
    r.to_u64().unwrap()
}

/// Image of `p` in F_p[x_v] after substituting `points` for all other variables.
fn eval_mod_p(p: &Poly, v: usize, points: &[u64; NVARS]) -> Vec<u64> {
    let d = p.degree(v) as usize;
    let mut out = vec![0u64; d + 1];
    for (e, c) in &p.terms {
        let mut t = big_mod(c);
        for i in 0..NVARS {
            if i != v && e[i] > 0 {
                t = mulmod(t, powmod(points[i], e[i] as u64));
            }
        }
        let k = e[v] as usize;
        out[k] = (out[k] + t) % PRIME;
    }
    out
}

fn trim(p: &mut Vec<u64>) {
    while p.len() > 1 && *p.last().unwrap() == 0 {
        p.pop();
    }
}

/// Degree of the monic gcd in F_p[x] (images assumed nonzero).
fn upoly_gcd_degree_mod_p(mut a: Vec<u64>, mut b: Vec<u64>) -> usize {
    trim(&mut a);
    trim(&mut b);
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    loop {
        if b.len() == 1 && b[0] == 0 {
            return a.len() - 1;
        }
        if b.len() == 1 {
            return 0;
        }
        // a mod b
        let inv = invmod(*b.last().unwrap());
        while a.len() >= b.len() && !(a.len() == 1 && a[0] == 0) {
            let shift = a.len() - b.len();
            let f = mulmod(*a.last().unwrap(), inv);
            for (i, bc) in b.iter().enumerate() {
                let sub = mulmod(f, *bc);
                a[i + shift] = (a[i + shift] + PRIME - sub) % PRIME;
            }
            a.pop();
            trim(&mut a);
            if a.is_empty() {
                a.push(0);
            }
            if a.len() < b.len() {
                break;
            }
        }
        std::mem::swap(&mut a, &mut b);
    }
}

/// Deterministic evaluation points (splitmix-style) so gcd results do not depend on runs.
fn eval_points(salt: u64) -> [u64; NVARS] {
    let mut s = 0x9E37_79B9_7F4A_7C15u64 ^ salt;
    let mut pts = [0u64; NVARS];
    for p in pts.iter_mut() {
        s = s.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = s;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        *p = z % (PRIME - 2) + 2;
    }
    pts
}

/// Upper bound on the degree of gcd(a, b) in variable `v`, via one modular image.
fn gcd_degree_bound(a: &Poly, b: &Poly, v: usize) -> u32 {
    let da = a.degree(v);
    let db = b.degree(v);
    if da == 0 || db == 0 {
        return 0;
    }
    for salt in 0..4u64 {
        let pts = eval_points(salt * 7919 + v as u64);
        let ia = eval_mod_p(a, v, &pts);
        let ib = eval_mod_p(b, v, &pts);
        if ia[da as usize] == 0 || ib[db as usize] == 0 {
            continue;
        }
        return upoly_gcd_degree_mod_p(ia, ib) as u32;
    }
    da.min(db)
}

impl Poly {
    /// Greatest common divisor in Z[x], normalized with positive leading coefficient.
    pub fn gcd(&self, other: &Self) -> Self {
        gcd(self, other)
    }
}

pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.clone().normalize_sign();
    }
    if b.is_zero() {
        return a.clone().normalize_sign();
    }
    if a == b {
        return a.clone().normalize_sign();
    }
    let ma = a.min_exp();
    let mb = b.min_exp();
    let mut mono = ZERO_EXP;
    for i in 0..NVARS {
        mono[i] = ma[i].min(mb[i]);
    }
    let one = BigInt::one();
    let a1 = if ma == ZERO_EXP { a.clone() } else { a.div_exact(&Poly::monomial(ma, one.clone())).unwrap() };
    let b1 = if mb == ZERO_EXP { b.clone() } else { b.div_exact(&Poly::monomial(mb, one.clone())).unwrap() };
    let g = gcd_no_monomial(&a1, &b1);
    if mono == ZERO_EXP {
        g
    } else {
        g.mul_monomial(&mono, &one)
    }
}

fn gcd_no_monomial(a: &Poly, b: &Poly) -> Poly {
    let ca = a.int_content();
    let cb = b.int_content();
    let cg = ca.gcd(&cb);
    if a.is_constant() || b.is_constant() {
        return Poly::constant(cg);
    }
    let a = a.div_exact(&Poly::constant(ca)).unwrap();
    let b = b.div_exact(&Poly::constant(cb)).unwrap();
    let g = gcd_primitive_int(&a, &b);
    g.scale(&cg)
}

/// gcd of two polynomials with integer content 1 and no monomial factor.
fn gcd_primitive_int(a: &Poly, b: &Poly) -> Poly {
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    // cheap divisibility checks
    if b.total_terms() <= a.total_terms() {
        if a.div_exact(b).is_some() {
            return b.clone().normalize_sign();
        }
    } else if b.div_exact(a).is_some() {
        return a.clone().normalize_sign();
    }
    let mut candidates = Vec::new();
    for v in 0..NVARS {
        let ha = a.has_var(v);
        let hb = b.has_var(v);
        if ha && hb && gcd_degree_bound(a, b, v) > 0 {
            candidates.push(v);
        }
    }
    if candidates.is_empty() {
        return Poly::one();
    }
    // A variable present in only one argument cannot occur in the gcd: reduce to content.
    for v in 0..NVARS {
        let ha = a.has_var(v);
        let hb = b.has_var(v);
        if ha && !hb {
            let c = content_in(a, v);
            return gcd(&c, b);
        }
        if hb && !ha {
            let c = content_in(b, v);
            return gcd(a, &c);
        }
    }
    let v = candidates[0];
    let ua = a.to_univariate(v);
    let ub = b.to_univariate(v);
    let conta = content_of(&ua);
    let contb = content_of(&ub);
    let cg = gcd(&conta, &contb);
    let pa: Vec<Poly> = ua.iter().map(|c| c.div_exact(&conta).unwrap()).collect();
    let pb: Vec<Poly> = ub.iter().map(|c| c.div_exact(&contb).unwrap()).collect();
    let g = subresultant_gcd(pa, pb);
    let g = Poly::from_univariate(&g, v);
    g.mul(&cg).normalize_sign()
}

fn content_in(p: &Poly, v: usize) -> Poly {
    content_of(&p.to_univariate(v))
}

fn content_of(coeffs: &[Poly]) -> Poly {
    let mut nz: Vec<&Poly> = coeffs.iter().filter(|c| !c.is_zero()).collect();
    nz.sort_by_key(|c| c.total_terms());
    let mut g = Poly::zero();
    for c in nz {
        g = gcd(&g, c);
        if g.is_constant() && g.as_constant().unwrap().abs().is_one() {
            return Poly::one();
        }
    }
    g.normalize_sign()
}

fn udeg(p: &[Poly]) -> usize {
    p.len() - 1
}

fn utrim(p: &mut Vec<Poly>) {
    while p.len() > 1 && p.last().unwrap().is_zero() {
        p.pop();
    }
}

fn uis_zero(p: &[Poly]) -> bool {
    p.len() == 1 && p[0].is_zero()
}

/// Pseudo-remainder lc(b)^(deg a - deg b + 1) * a mod b.
fn prem(a: &[Poly], b: &[Poly]) -> Vec<Poly> {
    let db = udeg(b);
    let lb = b[db].clone();
    let delta = udeg(a) - db;
    let mut r: Vec<Poly> = a.to_vec();
    let mut steps = 0usize;
    while !uis_zero(&r) && udeg(&r) >= db {
        let dr = udeg(&r);
        let lr = r[dr].clone();
        let shift = dr - db;
        let mut next: Vec<Poly> = r.iter().map(|c| c.mul(&lb)).collect();
        for (i, bc) in b.iter().enumerate() {
            next[i + shift] = next[i + shift].sub(&bc.mul(&lr));
        }
        next.pop();
        if next.is_empty() {
            next.push(Poly::zero());
        }
        utrim(&mut next);
        r = next;
        steps += 1;
    }
    let extra = delta + 1 - steps;
    if extra > 0 {
        let f = lb.pow(extra as u32);
        r = r.iter().map(|c| c.mul(&f)).collect();
    }
    r
}

/// Subresultant PRS gcd of primitive univariate polynomials over Z[others].
fn subresultant_gcd(mut a: Vec<Poly>, mut b: Vec<Poly>) -> Vec<Poly> {
    utrim(&mut a);
    utrim(&mut b);
    if udeg(&a) < udeg(&b) {
        std::mem::swap(&mut a, &mut b);
    }
    let mut g = Poly::one();
    let mut h = Poly::one();
    loop {
        let delta = udeg(&a) - udeg(&b);
        let r = prem(&a, &b);
        if uis_zero(&r) {
            let c = content_of(&b);
            return b.iter().map(|x| x.div_exact(&c).unwrap()).collect();
        }
        if udeg(&r) == 0 {
            return vec![Poly::one()];
        }
        a = b;
        let div = g.mul(&h.pow(delta as u32));
        b = r.iter().map(|x| x.div_exact(&div).expect("subresultant division")).collect();
        g = a[udeg(&a)].clone();
        h = if delta == 0 {
            h
        } else if delta == 1 {
            g.clone()
        } else {
            g.pow(delta as u32).div_exact(&h.pow(delta as u32 - 1)).expect("subresultant h")
        };
    }
}

// ---------------------------------------------------------------------------
// printing

pub const VAR_NAMES: [&str; NVARS] = ["u", "T", "z1", "z2", "z3", "z4"];

fn fmt_monomial(e: &Exp) -> String {
    let mut parts = Vec::new();
    for (i, &k) in e.iter().enumerate() {
        if k == 1 {
            parts.push(VAR_NAMES[i].to_string());
        } else if k > 1 {
            parts.push(format!("{}^{}", VAR_NAMES[i], k));
        }
    }
    parts.join("*")
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (e, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if idx == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let m = fmt_monomial(e);
            if m.is_empty() {
                write!(f, "{}", abs)?;
            } else if abs.is_one() {
                write!(f, "{}", m)?;
            } else {
                write!(f, "{}*{}", abs, m)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({})", self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u() -> Poly {
        Poly::var(0)
    }
    fn z() -> Poly {
        Poly::var(2)
    }
    fn c(n: i64) -> Poly {
        Poly::constant(BigInt::from(n))
    }

    #[test]
    fn arithmetic_basics() {
        let p = u().add(&c(1));
        let q = u().sub(&c(1));
        assert_eq!(p.mul(&q), u().mul(&u()).sub(&c(1)));
        assert_eq!(p.mul(&q).div_exact(&q), Some(p.clone()));
        assert_eq!(p.div_exact(&q), None);
        assert!(p.sub(&p).is_zero());
    }

    #[test]
    fn gcd_univariate() {
        let a = u().pow(4).sub(&c(1));
        let b = u().pow(6).sub(&c(1));
        assert_eq!(gcd(&a, &b), u().pow(2).sub(&c(1)));
    }

    #[test]
    fn gcd_multivariate_shared_factor() {
        let f = z().mul(&u()).sub(&c(1));
        let a = f.mul(&z().add(&u()));
        let b = f.mul(&z().sub(&u().pow(2))).scale(&BigInt::from(6));
        assert_eq!(gcd(&a, &b), f);
    }

    #[test]
    fn gcd_with_contents_and_monomials() {
        let a = u().mul(&z()).scale(&BigInt::from(4)).mul(&u().add(&c(2)));
        let b = u().pow(2).scale(&BigInt::from(6)).mul(&u().add(&c(2)));
        let g = gcd(&a, &b);
        assert_eq!(g, u().scale(&BigInt::from(2)).mul(&u().add(&c(2))));
    }

    #[test]
    fn gcd_coprime_fast_path() {
        let a = z().pow(2).mul(&u().pow(2)).add(&c(1));
        let b = z().mul(&u()).add(&c(1));
        assert!(gcd(&a, &b).is_one());
    }

    #[test]
    fn gcd_needs_content_in_other_variable() {
        // common factor (u^2 + 1) lives only in the coefficient ring w.r.t. z
        let k = u().pow(2).add(&c(1));
        let a = k.mul(&z().add(&c(3)));
        let b = k.mul(&z().sub(&u()));
        assert_eq!(gcd(&a, &b), k);
    }
}
