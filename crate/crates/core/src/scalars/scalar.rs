use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};

use super::poly::{Poly, NVARS};
use super::ratfunc::RatFunc;
use super::ScalarError;

/// A polynomial variable of the coefficient field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub usize);

impl Var {
    /// `u`, with `q = u^M`.
    pub const U: Var = Var(0);
    /// Multiplicative shift variable `T = q^t`.
    pub const T: Var = Var(1);

    /// Character generator `z_{i+1}`.
    pub fn z(i: usize) -> Var {
        assert!(i + 2 < NVARS, "too many character generators");
        Var(i + 2)
    }

    pub fn name(&self) -> &'static str {
        super::poly::VAR_NAMES[self.0]
    }
}

/// Monomial relation `z^n = sign * u^u_exp` on a character generator.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Relation {
    pub var: Var,
    pub n: u32,
    pub sign: i8,
    pub u_exp: i64,
}

/// Finite extension of the rational function field by relation-bearing generators.
///
/// Elements are coordinate vectors in the monomial basis `prod z_g^{k_g}`,
/// `0 <= k_g < n_g`, mixed radix with the first relation least significant.
#[derive(Debug)]
pub struct Extension {
    rels: Vec<Relation>,
    dim: usize,
    // (i, j) -> (index of basis_i * basis_j after reduction, reduction factor)
    table: Vec<(usize, RatFunc)>,
}

impl PartialEq for Extension {
    fn eq(&self, o: &Self) -> bool {
        self.rels == o.rels
    }
}

impl Eq for Extension {}

impl Extension {
    pub fn new(rels: Vec<Relation>) -> Self {
        let dim: usize = rels.iter().map(|r| r.n as usize).product();
        let mut ext = Extension { rels, dim, table: Vec::new() };
        let mut table = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                let ei = ext.exps_of(i);
                let ej = ext.exps_of(j);
                let mut idx_exps = vec![0i64; ext.rels.len()];
                let mut factor = RatFunc::one();
                for g in 0..ext.rels.len() {
                    let (k, f) = ext.reduce_exp(g, ei[g] + ej[g]);
                    idx_exps[g] = k;
                    factor = factor.mul(&f);
                }
                table.push((ext.index_of(&idx_exps), factor));
            }
        }
        ext.table = table;
        ext
    }

    pub fn relations(&self) -> &[Relation] {
        &self.rels
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn exps_of(&self, mut idx: usize) -> Vec<i64> {
        let mut out = Vec::with_capacity(self.rels.len());
        for r in &self.rels {
            out.push((idx % r.n as usize) as i64);
            idx /= r.n as usize;
        }
        out
    }

    fn index_of(&self, exps: &[i64]) -> usize {
        let mut idx = 0usize;
        let mut mul = 1usize;
        for (g, r) in self.rels.iter().enumerate() {
            idx += exps[g] as usize * mul;
            mul *= r.n as usize;
        }
        idx
    }

    /// Reduces `z_g^e` to `factor * z_g^k` with `0 <= k < n`.
    fn reduce_exp(&self, g: usize, e: i64) -> (i64, RatFunc) {
        let r = &self.rels[g];
        let n = r.n as i64;
        let q = e.div_euclid(n);
        let k = e.rem_euclid(n);
        let mut exps = [0i64; NVARS];
        exps[Var::U.0] = r.u_exp * q;
        let sign = if r.sign < 0 && q.rem_euclid(2) == 1 { -1 } else { 1 };
        let c = BigRational::from_integer(BigInt::from(sign));
        (k, RatFunc::laurent_monomial(&c, &exps))
    }

    fn gen_index(&self, v: Var) -> Option<usize> {
        self.rels.iter().position(|r| r.var == v)
    }
}

/// Element of the exact coefficient field.
#[derive(Clone)]
pub struct Scalar {
    c: Vec<RatFunc>,
    ext: Option<Arc<Extension>>,
}

fn unify_ext(
    a: &Option<Arc<Extension>>,
    b: &Option<Arc<Extension>>,
) -> Option<Arc<Extension>> {
    match (a, b) {
        (None, None) => None,
        (Some(x), None) | (None, Some(x)) => Some(x.clone()),
        (Some(x), Some(y)) => {
            assert!(Arc::ptr_eq(x, y) || **x == **y, "scalars from incompatible fields");
            Some(x.clone())
        }
    }
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar { c: vec![RatFunc::zero()], ext: None }
    }

    pub fn one() -> Self {
        Scalar { c: vec![RatFunc::one()], ext: None }
    }

    pub fn from_int(n: i64) -> Self {
        Scalar { c: vec![RatFunc::from_int(n)], ext: None }
    }

    pub fn from_rational(r: &BigRational) -> Self {
        Scalar { c: vec![RatFunc::from_rational(r)], ext: None }
    }

    pub fn from_ratfunc(r: RatFunc) -> Self {
        Scalar { c: vec![r], ext: None }
    }

    /// The polynomial variable itself (must not be relation-bearing; see [`Field::var`]).
    pub fn var(v: Var) -> Self {
        Scalar::from_ratfunc(RatFunc::from_poly(Poly::var(v.0)))
    }

    pub fn extension(&self) -> Option<&Arc<Extension>> {
        self.ext.as_ref()
    }

    /// Coordinates in the extension basis (length 1 without extension).
    pub fn coords(&self) -> &[RatFunc] {
        &self.c
    }

    fn lifted(&self, ext: &Option<Arc<Extension>>) -> Vec<RatFunc> {
        match ext {
            None => self.c.clone(),
            Some(e) => {
                if self.ext.is_some() {
                    self.c.clone()
                } else {
                    let mut v = vec![RatFunc::zero(); e.dim()];
                    v[0] = self.c[0].clone();
                    v
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.c[0].is_one() && self.c[1..].iter().all(|x| x.is_zero())
    }

    /// True when the element lies in the base rational function field.
    pub fn is_base(&self) -> bool {
        self.c[1..].iter().all(|x| x.is_zero())
    }

    pub fn base_part(&self) -> Option<&RatFunc> {
        if self.is_base() {
            Some(&self.c[0])
        } else {
            None
        }
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        self.base_part().and_then(|r| r.as_rational())
    }

    pub fn has_var(&self, v: Var) -> bool {
        if self.c.iter().any(|x| x.has_var(v.0)) {
            return true;
        }
        match &self.ext {
            Some(e) => {
                if let Some(g) = e.gen_index(v) {
                    (0..e.dim()).any(|i| e.exps_of(i)[g] > 0 && !self.c[i].is_zero())
                } else {
                    false
                }
            }
            None => false,
        }
    }

    pub fn neg(&self) -> Self {
        Scalar { c: self.c.iter().map(|x| x.neg()).collect(), ext: self.ext.clone() }
    }

    pub fn add(&self, o: &Self) -> Self {
        if o.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return o.clone();
        }
        let ext = unify_ext(&self.ext, &o.ext);
        let a = self.lifted(&ext);
        let b = o.lifted(&ext);
        Scalar { c: a.iter().zip(b.iter()).map(|(x, y)| x.add(y)).collect(), ext }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            let ext = unify_ext(&self.ext, &o.ext);
            return Scalar { c: Scalar::zero().lifted(&ext), ext };
        }
        let ext = unify_ext(&self.ext, &o.ext);
        match &ext {
            None => Scalar { c: vec![self.c[0].mul(&o.c[0])], ext: None },
            Some(e) => {
                if self.ext.is_none() || self.is_base() {
                    let s = &self.c[0];
                    let b = o.lifted(&ext);
                    return Scalar { c: b.iter().map(|x| s.mul(x)).collect(), ext };
                }
                if o.ext.is_none() || o.is_base() {
                    let s = &o.c[0];
                    let a = self.lifted(&ext);
                    return Scalar { c: a.iter().map(|x| x.mul(s)).collect(), ext };
                }
                let a = self.lifted(&ext);
                let b = o.lifted(&ext);
                let d = e.dim();
                let mut out = vec![RatFunc::zero(); d];
                for i in 0..d {
                    if a[i].is_zero() {
                        continue;
                    }
                    for j in 0..d {
                        if b[j].is_zero() {
                            continue;
                        }
                        let (k, f) = &e.table[i * d + j];
                        out[*k] = out[*k].add(&a[i].mul(&b[j]).mul(f));
                    }
                }
                Scalar { c: out, ext }
            }
        }
    }

    pub fn inv(&self) -> Result<Self, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        if self.is_base() {
            let r = self.c[0].inv().unwrap();
            let mut c = vec![RatFunc::zero(); self.c.len()];
            c[0] = r;
            return Ok(Scalar { c, ext: self.ext.clone() });
        }
        let e = self.ext.as_ref().unwrap();
        let d = e.dim();
        // column j of the multiplication matrix = self * basis_j
        let mut m = vec![vec![RatFunc::zero(); d + 1]; d];
        for j in 0..d {
            for i in 0..d {
                if self.c[i].is_zero() {
                    continue;
                }
                let (k, f) = &e.table[i * d + j];
                m[*k][j] = m[*k][j].add(&self.c[i].mul(f));
            }
        }
        m[0][d] = RatFunc::one();
        let x = solve_small(m).ok_or(ScalarError::DivisionByZero)?;
        Ok(Scalar { c: x, ext: self.ext.clone() })
    }

    pub fn div(&self, o: &Self) -> Result<Self, ScalarError> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn pow(&self, n: i64) -> Self {
        if n < 0 {
            return self.inv().expect("negative power of zero").pow(-n);
        }
        if self.is_base() && self.ext.is_none() {
            return Scalar { c: vec![self.c[0].pow(n)], ext: None };
        }
        let mut base = self.clone();
        let mut acc = Scalar::one();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    fn trimmed_len(&self) -> usize {
        let mut n = self.c.len();
        while n > 1 && self.c[n - 1].is_zero() {
            n -= 1;
        }
        n
    }
}

/// Gaussian elimination on an augmented d x (d+1) system over the base field.
fn solve_small(mut m: Vec<Vec<RatFunc>>) -> Option<Vec<RatFunc>> {
    let d = m.len();
    for col in 0..d {
        let p = (col..d).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, p);
        let inv = m[col][col].inv().unwrap();
        for k in col..=d {
            m[col][k] = m[col][k].mul(&inv);
        }
        for r in 0..d {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for k in col..=d {
                    let t = m[col][k].mul(&f);
                    m[r][k] = m[r][k].sub(&t);
                }
            }
        }
    }
    Some(m.into_iter().map(|row| row[d].clone()).collect())
}

impl PartialEq for Scalar {
    fn eq(&self, o: &Self) -> bool {
        let n = self.trimmed_len();
        if n != o.trimmed_len() {
            return false;
        }
        self.c[..n] == o.c[..n]
    }
}

impl Eq for Scalar {}

impl Hash for Scalar {
    fn hash<H: Hasher>(&self, state: &mut H) {
        let n = self.trimmed_len();
        self.c[..n].hash(state);
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.trimmed_len();
        if n == 1 {
            return write!(f, "{}", self.c[0]);
        }
        let e = self.ext.as_ref().unwrap();
        let mut first = true;
        for i in 0..n {
            if self.c[i].is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let exps = e.exps_of(i);
            let basis: Vec<String> = e
                .rels
                .iter()
                .zip(exps.iter())
                .filter(|(_, &k)| k > 0)
                .map(|(r, &k)| if k == 1 { r.var.name().to_string() } else { format!("{}^{}", r.var.name(), k) })
                .collect();
            if basis.is_empty() {
                write!(f, "({})", self.c[i])?;
            } else {
                write!(f, "({})*{}", self.c[i], basis.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident, $imp:ident) => {
        impl std::ops::$tr<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $m(self, o: &Scalar) -> Scalar {
                Scalar::$imp(self, o)
            }
        }
        impl std::ops::$tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, o: Scalar) -> Scalar {
                Scalar::$imp(&self, &o)
            }
        }
        impl std::ops::$tr<&Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, o: &Scalar) -> Scalar {
                Scalar::$imp(&self, o)
            }
        }
        impl std::ops::$tr<Scalar> for &Scalar {
            type Output = Scalar;
            fn $m(self, o: Scalar) -> Scalar {
                Scalar::$imp(self, &o)
            }
        }
    };
}

forward_binop!(Add, add, add);
forward_binop!(Sub, sub, sub);
forward_binop!(Mul, mul, mul);

impl std::ops::Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::neg(&self)
    }
}

impl std::ops::Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::neg(self)
    }
}

/// Per-computation view of the coefficient field.
///
/// Carries the root order `M` (`q = u^M`), optional relation-bearing
/// character generators, and, in specialized mode, numeric values for `u`
/// and the free characters.
#[derive(Clone, Debug)]
pub struct Field {
    m: u32,
    ext: Option<Arc<Extension>>,
    special: Option<Arc<Vec<(Var, BigRational)>>>,
}

impl Field {
    pub fn new(m: u32) -> Self {
        assert!(m >= 1);
        Field { m, ext: None, special: None }
    }

    pub fn with_relations(mut self, rels: Vec<Relation>) -> Self {
        self.ext = if rels.is_empty() { None } else { Some(Arc::new(Extension::new(rels))) };
        self
    }

    /// Specialized (probabilistic) mode: listed variables are replaced by rationals on creation.
    pub fn specialized(mut self, values: Vec<(Var, BigRational)>) -> Result<Self, ScalarError> {
        for (v, x) in &values {
            if *v == Var::U && (x.is_zero() || x.is_one() || *x == -BigRational::one()) {
                return Err(ScalarError::InvalidAssignment("q must not be zero or a root of unity".into()));
            }
            if let Some(e) = &self.ext {
                if e.gen_index(*v).is_some() {
                    return Err(ScalarError::InvalidAssignment(format!(
                        "generator {} carries a relation and cannot take a rational value",
                        v.name()
                    )));
                }
            }
        }
        self.special = Some(Arc::new(values));
        Ok(self)
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn is_specialized(&self) -> bool {
        self.special.is_some()
    }

    pub fn extension(&self) -> Option<&Arc<Extension>> {
        self.ext.as_ref()
    }

    fn special_value(&self, v: Var) -> Option<&BigRational> {
        self.special.as_ref().and_then(|s| s.iter().find(|(w, _)| *w == v).map(|(_, x)| x))
    }

    /// Laurent monomial `c * prod v^e` in this field, reducing relation generators.
    pub fn monomial(&self, c: &BigRational, exps: &[(Var, i64)]) -> Scalar {
        let mut plain = [0i64; NVARS];
        let mut rel_exps: Vec<i64> = match &self.ext {
            Some(e) => vec![0; e.relations().len()],
            None => Vec::new(),
        };
        let mut coef = c.clone();
        for &(v, e) in exps {
            if e == 0 {
                continue;
            }
            if let Some(x) = self.special_value(v) {
                let xp = if e >= 0 { num_traits::pow(x.clone(), e as usize) } else { num_traits::pow(x.recip(), (-e) as usize) };
                coef *= xp;
                continue;
            }
            if let Some(ext) = &self.ext {
                if let Some(g) = ext.gen_index(v) {
                    rel_exps[g] += e;
                    continue;
                }
            }
            plain[v.0] += e;
        }
        let base = RatFunc::laurent_monomial(&coef, &plain);
        match &self.ext {
            None => Scalar { c: vec![base], ext: None },
            Some(ext) => {
                let mut f = base;
                let mut idx = vec![0i64; rel_exps.len()];
                for g in 0..rel_exps.len() {
                    let (k, fac) = ext.reduce_exp(g, rel_exps[g]);
                    idx[g] = k;
                    f = f.mul(&fac);
                }
                // the reduction factor may mention u, which might be specialized
                let f = if let Some(x) = self.special_value(Var::U) {
                    specialize_rat_u(&f, x)
                } else {
                    f
                };
                let mut c = vec![RatFunc::zero(); ext.dim()];
                c[ext.index_of(&idx)] = f;
                Scalar { c, ext: Some(ext.clone()) }
            }
        }
    }

    pub fn int(&self, n: i64) -> Scalar {
        Scalar::from_int(n)
    }

    pub fn var(&self, v: Var) -> Scalar {
        self.monomial(&BigRational::one(), &[(v, 1)])
    }

    /// `q^r`; errors if `r*M` is not an integer.
    pub fn q_pow(&self, r: Ratio<i64>) -> Result<Scalar, ScalarError> {
        let e = self.u_exponent(r)?;
        Ok(self.monomial(&BigRational::one(), &[(Var::U, e)]))
    }

    pub fn u_exponent(&self, r: Ratio<i64>) -> Result<i64, ScalarError> {
        let x = r * Ratio::from_integer(self.m as i64);
        if !x.is_integer() {
            let need = (*r.denom() as u32) * self.m / num_integer::gcd(*r.denom() as u32, self.m);
            return Err(ScalarError::Precision { exponent: r.to_string(), required_m: need });
        }
        Ok(x.to_integer())
    }

    /// `[n]_{q_a}` twisted by a character: `(X - X^{-1}) / (q_a - q_a^{-1})` with
    /// `q_a = q^{base}` and `X = q_a^n * chr`.
    pub fn qbracket(&self, n: Ratio<i64>, chr: Option<&Scalar>, base: Ratio<i64>) -> Result<Scalar, ScalarError> {
        let qa = self.q_pow(base)?;
        let mut x = self.q_pow(base * n)?;
        if let Some(c) = chr {
            x = x.mul(c);
        }
        let num = x.sub(&x.inv()?);
        let den = qa.sub(&qa.inv()?);
        num.div(&den)
    }

    /// Integer q-number `[n]_{q^{base}}`.
    pub fn qint(&self, n: i64, base: Ratio<i64>) -> Result<Scalar, ScalarError> {
        self.qbracket(Ratio::from_integer(n), None, base)
    }

    pub fn qfactorial(&self, n: i64, base: Ratio<i64>) -> Result<Scalar, ScalarError> {
        let mut acc = Scalar::one();
        for k in 1..=n {
            acc = acc.mul(&self.qint(k, base)?);
        }
        Ok(acc)
    }
}

fn specialize_rat_u(f: &RatFunc, x: &BigRational) -> RatFunc {
    let xs = Scalar::from_rational(x);
    let s = super::specialize(&Scalar::from_ratfunc(f.clone()), &[(Var::U, xs)]).expect("specialize u");
    s.c[0].clone()
}

pub(crate) fn eval_poly(p: &Poly, values: &[Option<Scalar>; NVARS]) -> Scalar {
    let mut acc = Scalar::zero();
    for (e, c) in p.terms() {
        let mut t = Scalar::from_rational(&BigRational::from_integer(c.clone()));
        let mut rest = [0u32; NVARS];
        for i in 0..NVARS {
            if e[i] == 0 {
                continue;
            }
            match &values[i] {
                Some(v) => t = t.mul(&v.pow(e[i] as i64)),
                None => rest[i] = e[i],
            }
        }
        if rest.iter().any(|&k| k > 0) {
            t = t.mul(&Scalar::from_ratfunc(RatFunc::from_poly(Poly::monomial(rest, BigInt::one()))));
        }
        acc = acc.add(&t);
    }
    acc
}

impl Scalar {
    pub(crate) fn parts(&self) -> (&[RatFunc], Option<&Arc<Extension>>) {
        (&self.c, self.ext.as_ref())
    }

    pub(crate) fn from_parts(c: Vec<RatFunc>, ext: Option<Arc<Extension>>) -> Self {
        Scalar { c, ext }
    }

    pub(crate) fn ext_basis_exps(&self, i: usize) -> Vec<(Var, i64)> {
        match &self.ext {
            None => Vec::new(),
            Some(e) => e.rels.iter().zip(e.exps_of(i)).map(|(r, k)| (r.var, k)).collect(),
        }
    }
}

impl Scalar {
    /// Rough size measure used for pivot selection.
    pub fn complexity(&self) -> usize {
        self.c
            .iter()
            .filter(|x| !x.is_zero())
            .map(|x| x.numer().total_terms() + x.denom().total_terms())
            .sum()
    }
}
