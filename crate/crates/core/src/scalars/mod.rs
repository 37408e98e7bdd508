//! Exact coefficient field: rational functions in `u` (with `q = u^M`), a
//! shift variable `T = q^t`, and character generators `z_i`, optionally
//! extended by monomial relations `z^n = ±u^m`.

mod poly;
mod ratfunc;
mod scalar;

pub use poly::{Exp, Poly, NVARS, VAR_NAMES};
pub use ratfunc::RatFunc;
pub use scalar::{Extension, Field, Relation, Scalar, Var};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ScalarError {
    #[error("q-exponent {exponent} is not representable; root order M must be a multiple of {required_m}")]
    Precision { exponent: String, required_m: u32 },
    #[error("pole of order {order} at T = 1")]
    Pole { order: u32 },
    #[error("specialization hit a pole")]
    SpecializationPole,
    #[error("invalid assignment: {0}")]
    InvalidAssignment(String),
    #[error("division by zero")]
    DivisionByZero,
}

/// Exact `t -> 0` limit: evaluation at `T = 1` of the reduced fraction.
///
/// Canonical fractions carry no common factors, so a vanishing denominator
/// at `T = 1` is a genuine pole, reported with its order.
pub fn limit_at_unity(s: &Scalar, v: Var) -> Result<Scalar, ScalarError> {
    let (coords, ext) = s.parts();
    let one = BigInt::one();
    let mut out = Vec::with_capacity(coords.len());
    let mut worst = 0u32;
    for c in coords {
        let den1 = c.denom().eval_var_int(v.0, &one);
        if den1.is_zero() {
            let lin = Poly::var(v.0).sub(&Poly::one());
            let mut d = c.denom().clone();
            let mut order = 0u32;
            while let Some(q) = d.div_exact(&lin) {
                d = q;
                order += 1;
            }
            worst = worst.max(order.max(1));
            out.push(RatFunc::zero());
            continue;
        }
        let num1 = c.numer().eval_var_int(v.0, &one);
        out.push(RatFunc::new(num1, den1));
    }
    if worst > 0 {
        return Err(ScalarError::Pole { order: worst });
    }
    Ok(Scalar::from_parts(out, ext.cloned()))
}

/// Exact substitution of field elements for variables. No cancellation is
/// attempted beyond the canonical form of the input: a denominator that
/// vanishes under the assignment is reported as a pole.
pub fn specialize(s: &Scalar, assignment: &[(Var, Scalar)]) -> Result<Scalar, ScalarError> {
    let mut values: [Option<Scalar>; NVARS] = Default::default();
    for (v, x) in assignment {
        values[v.0] = Some(x.clone());
    }
    if let Some(uv) = &values[Var::U.0] {
        if let Some(r) = uv.as_rational() {
            if r.is_zero() || r.is_one() || r == -num_rational::BigRational::one() {
                return Err(ScalarError::InvalidAssignment(
                    "q = u^M must not be zero or a root of unity".into(),
                ));
            }
        }
    }
    let (coords, ext) = s.parts();
    if let Some(e) = ext {
        for r in e.relations() {
            if let Some(val) = &values[r.var.0] {
                let u = values[Var::U.0].clone().unwrap_or_else(|| Scalar::var(Var::U));
                let rhs = Scalar::from_int(r.sign as i64).mul(&u.pow(r.u_exp));
                if val.pow(r.n as i64) != rhs {
                    return Err(ScalarError::InvalidAssignment(format!(
                        "value for {} violates its relation",
                        r.var.name()
                    )));
                }
            }
        }
    }
    let mut acc = Scalar::zero();
    for (i, c) in coords.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let num = scalar::eval_poly(c.numer(), &values);
        let den = scalar::eval_poly(c.denom(), &values);
        if den.is_zero() {
            return Err(ScalarError::SpecializationPole);
        }
        let mut term = num.div(&den)?;
        if i > 0 {
            // basis monomial of the extension
            let mut basis = Scalar::one();
            for (v, k) in s.ext_basis_exps(i) {
                if k == 0 {
                    continue;
                }
                match &values[v.0] {
                    Some(val) => basis = basis.mul(&val.pow(k)),
                    None => basis = basis.mul(&gen_scalar(s, v).pow(k)),
                }
            }
            term = term.mul(&basis);
        }
        acc = acc.add(&term);
    }
    Ok(acc)
}

fn gen_scalar(s: &Scalar, v: Var) -> Scalar {
    let (coords, ext) = s.parts();
    let ext = ext.expect("generator outside extension");
    let n = coords.len();
    for i in 0..n {
        let exps = s.ext_basis_exps(i);
        if exps.iter().all(|(w, k)| if *w == v { *k == 1 } else { *k == 0 }) {
            let mut c = vec![RatFunc::zero(); n];
            c[i] = RatFunc::one();
            return Scalar::from_parts(c, Some(ext.clone()));
        }
    }
    unreachable!("generator has n >= 2")
}

#[cfg(test)]
mod tests;
