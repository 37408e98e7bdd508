//! Involutions on generator words, contravariant forms and their radicals.

use crate::linalg::Matrix;
use crate::modules::{pair_of, Kind, Label, ModuleError, WVec, WeightModule};
use crate::scalars::Scalar;

/// Letter of a generator word; `K(i, n)` stands for `q^{n h_{a_i}}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Letter {
    E(usize),
    F(usize),
    K(usize, i64),
}

/// A linear combination of generator words.
#[derive(Clone, Debug, PartialEq)]
pub struct GenExpr {
    pub terms: Vec<(Scalar, Vec<Letter>)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Involution {
    /// Automorphism `e <-> f`, `K -> K^{-1}`.
    Sigma,
    /// Antipode.
    Gamma,
    /// Inverse antipode.
    GammaInv,
    /// `gamma^{-1} . sigma`, an anti-automorphism.
    Omega,
}

impl GenExpr {
    pub fn word(w: &[Letter]) -> Self {
        GenExpr { terms: vec![(Scalar::one(), w.to_vec())] }
    }

    fn simplify(mut self) -> Self {
        for (_, w) in self.terms.iter_mut() {
            let mut out: Vec<Letter> = Vec::new();
            for &l in w.iter() {
                match (out.last_mut(), l) {
                    (Some(Letter::K(i, a)), Letter::K(j, b)) if *i == j => {
                        *a += b;
                        if *a == 0 {
                            out.pop();
                        }
                    }
                    (_, Letter::K(_, 0)) => {}
                    _ => out.push(l),
                }
            }
            *w = out;
        }
        self.terms.retain(|(c, _)| !c.is_zero());
        self
    }

    /// Applies the expression to a weight vector (rightmost letter first).
    pub fn apply(&self, m: &WeightModule, v: &WVec) -> Result<Option<WVec>, ModuleError> {
        let mut acc: Option<WVec> = None;
        for (c, w) in &self.terms {
            let mut x = v.clone();
            for l in w.iter().rev() {
                x = match *l {
                    Letter::E(i) => m.apply_e(i, &x)?,
                    Letter::F(i) => m.apply_f(i, &x)?,
                    Letter::K(i, n) => {
                        let r = m.root_system().simple_root(i);
                        x.scale(&m.char_root(&x.beta, &r).pow(n))
                    }
                };
            }
            let x = x.scale(c);
            acc = Some(match acc {
                None => x,
                Some(a) => a.add(&x),
            });
        }
        Ok(acc)
    }
}

fn image(map: Involution, l: Letter) -> GenExpr {
    let neg = || Scalar::one().neg();
    use Letter::*;
    let terms = match (map, l) {
        (Involution::Sigma, E(i)) => vec![(Scalar::one(), vec![F(i)])],
        (Involution::Sigma, F(i)) => vec![(Scalar::one(), vec![E(i)])],
        (Involution::Sigma, K(i, n)) => vec![(Scalar::one(), vec![K(i, -n)])],
        (Involution::Gamma, E(i)) => vec![(neg(), vec![E(i), K(i, -1)])],
        (Involution::Gamma, F(i)) => vec![(neg(), vec![K(i, 1), F(i)])],
        (Involution::Gamma, K(i, n)) => vec![(Scalar::one(), vec![K(i, -n)])],
        (Involution::GammaInv, E(i)) => vec![(neg(), vec![K(i, -1), E(i)])],
        (Involution::GammaInv, F(i)) => vec![(neg(), vec![F(i), K(i, 1)])],
        (Involution::GammaInv, K(i, n)) => vec![(Scalar::one(), vec![K(i, -n)])],
        (Involution::Omega, E(i)) => vec![(neg(), vec![F(i), K(i, 1)])],
        (Involution::Omega, F(i)) => vec![(neg(), vec![K(i, -1), E(i)])],
        (Involution::Omega, K(i, n)) => vec![(Scalar::one(), vec![K(i, n)])],
    };
    GenExpr { terms }
}

fn is_anti(map: Involution) -> bool {
    !matches!(map, Involution::Sigma)
}

/// Image of a word under one of the involutions, expanded letter by letter.
pub fn involution_on_word(map: Involution, word: &[Letter]) -> GenExpr {
    let letters: Vec<Letter> = if is_anti(map) { word.iter().rev().copied().collect() } else { word.to_vec() };
    let mut acc = GenExpr::word(&[]);
    for l in letters {
        let img = image(map, l);
        let mut terms = Vec::new();
        for (c, w) in &acc.terms {
            for (d, v) in &img.terms {
                let mut x = w.clone();
                x.extend(v.iter().copied());
                terms.push((c.mul(d), x));
            }
        }
        acc = GenExpr { terms };
    }
    acc.simplify()
}

/// Image of a whole expression.
pub fn involution_on_expr(map: Involution, x: &GenExpr) -> GenExpr {
    let mut terms = Vec::new();
    for (c, w) in &x.terms {
        for (d, v) in involution_on_word(map, w).terms {
            terms.push((c.mul(&d), v));
        }
    }
    GenExpr { terms }.simplify()
}

/// Per-weight Gram blocks, indexed like the module's weights.
#[derive(Clone, Debug)]
pub struct GradedForm {
    pub blocks: Vec<Matrix>,
}

impl GradedForm {
    pub fn block(&self, w: usize) -> &Matrix {
        &self.blocks[w]
    }

    /// `<x, y>` for two vectors of the same weight.
    pub fn pair(&self, m: &WeightModule, x: &WVec, y: &WVec) -> Scalar {
        if x.beta != y.beta {
            return Scalar::zero();
        }
        match m.weight_index(&x.beta) {
            None => Scalar::zero(),
            Some(w) => {
                let gy = self.blocks[w].mul_vec(&y.coords);
                x.coords.iter().zip(&gy).fold(Scalar::zero(), |s, (a, b)| s.add(&a.mul(b)))
            }
        }
    }
}

/// Scalar `c` with `omega(f_i) w = c e_i w` for `w` in `M[top - beta]`.
pub fn omega_f_coef(m: &WeightModule, beta: &[i64], i: usize) -> Scalar {
    let rs = m.root_system();
    let a = rs.simple_root(i);
    let aa = rs.ip(&a, &a);
    let k = m.char_root(beta, &a).inv().expect("characters are invertible");
    m.field().q_pow(-aa).expect("root lengths fit the field").mul(&k).neg()
}

/// Contravariant form with `<1, 1> = 1` on every stored weight of a cyclic
/// highest-weight module, via `<f_i x, w> = <x, omega(f_i) w>`.
pub fn contravariant_form(m: &WeightModule) -> Result<GradedForm, ModuleError> {
    let rs = m.root_system().clone();
    let n = rs.rank();
    let mut blocks: Vec<Matrix> = Vec::with_capacity(m.num_weights());
    blocks.push(Matrix::identity(1));
    for w in 1..m.num_weights() {
        let beta = m.weights()[w].clone();
        let d = m.dim(w);
        // sources: for each i, M[beta - a_i] and its block F_i into M[beta]
        let mut srcs: Vec<(usize, usize)> = Vec::new();
        for i in 0..n {
            let s: Vec<i64> = beta.iter().zip(rs.simple_root(i)).map(|(x, y)| x - y).collect();
            if let Some(sw) = m.weight_index(&s) {
                srcs.push((i, sw));
            }
        }
        // express each basis vector as sum_i f_i x_i
        let word_labels = m.labels(w).iter().all(|l| matches!(l, Label::Word(_)));
        let mut g = Matrix::zeros(d, d);
        if word_labels {
            for a in 0..d {
                let Label::Word(word) = &m.labels(w)[a] else { unreachable!() };
                let i = word[0];
                let sw = srcs.iter().find(|(j, _)| *j == i).unwrap().1;
                let k = m.labels(sw).iter().position(|l| *l == Label::Word(word[1..].to_vec())).unwrap();
                let row = pairing_row(m, &blocks, &beta, i, sw, &unit(m.dim(sw), k))?;
                for c in 0..d {
                    g.set(a, c, row[c].clone());
                }
            }
        } else {
            let mut stacked: Option<Matrix> = None;
            for &(i, sw) in &srcs {
                let fb = m.f_block(i, sw)?.clone();
                stacked = Some(match stacked {
                    None => fb,
                    Some(s) => s.hstack(&fb),
                });
            }
            let stacked = stacked.expect("positive-depth weight has a predecessor");
            let x = stacked.solve(&Matrix::identity(d)).ok_or_else(|| {
                ModuleError::RelationFailed(format!("module is not generated by its top vector at {:?}", beta))
            })?;
            let mut off = 0;
            for &(i, sw) in &srcs {
                let ds = m.dim(sw);
                for a in 0..d {
                    let xi: Vec<Scalar> = (0..ds).map(|r| x.get(off + r, a).clone()).collect();
                    if xi.iter().all(|s| s.is_zero()) {
                        continue;
                    }
                    let row = pairing_row(m, &blocks, &beta, i, sw, &xi)?;
                    for c in 0..d {
                        g.add_at(a, c, &row[c]);
                    }
                }
                off += ds;
            }
        }
        blocks.push(g);
    }
    Ok(GradedForm { blocks })
}

fn unit(d: usize, k: usize) -> Vec<Scalar> {
    let mut v = vec![Scalar::zero(); d];
    v[k] = Scalar::one();
    v
}

/// Row `c -> <f_i x, v_c>` for `x` in `M[beta - a_i]` (index `sw`).
fn pairing_row(
    m: &WeightModule,
    blocks: &[Matrix],
    beta: &[i64],
    i: usize,
    sw: usize,
    x: &[Scalar],
) -> Result<Vec<Scalar>, ModuleError> {
    let coef = omega_f_coef(m, beta, i);
    let w = m.weight_index(beta).unwrap();
    // G_{beta - a_i} E_i, then x^T
    let ge = blocks[sw].mul(m.e_block(i, w));
    let d = m.dim(w);
    Ok((0..d)
        .map(|c| {
            let mut s = Scalar::zero();
            for r in 0..x.len() {
                if !x[r].is_zero() {
                    s = s.add(&x[r].mul(ge.get(r, c)));
                }
            }
            s.mul(&coef)
        })
        .collect())
}

/// Gram block at the weight `top - beta`.
pub fn contravariant_gram(m: &WeightModule, beta: &[i64]) -> Result<Matrix, ModuleError> {
    let d = m.dim_at(beta)?;
    if d == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    let form = contravariant_form(m)?;
    Ok(form.blocks[m.weight_index(beta).unwrap()].clone())
}

/// Product form `<v (x) z, v' (x) z'> = <v, v'><z, z'>` on a tensor module.
pub fn canonical_form(vz: &WeightModule, fv: &GradedForm, fz: &GradedForm) -> GradedForm {
    assert_eq!(vz.kind(), Kind::Tensor, "canonical form needs a tensor module");
    let blocks = (0..vz.num_weights())
        .map(|w| {
            let labels = vz.labels(w);
            let d = labels.len();
            let mut g = Matrix::zeros(d, d);
            for a in 0..d {
                let ((wa, ka), (wb, kb)) = pair_of(&labels[a]);
                for c in 0..d {
                    let ((wa2, ka2), (wb2, kb2)) = pair_of(&labels[c]);
                    if wa != wa2 || wb != wb2 {
                        continue;
                    }
                    let x = fv.blocks[wa].get(ka, ka2);
                    let y = fz.blocks[wb].get(kb, kb2);
                    if !x.is_zero() && !y.is_zero() {
                        g.set(a, c, x.mul(y));
                    }
                }
            }
            g
        })
        .collect();
    GradedForm { blocks }
}

/// Gram block of the canonical form at `top - beta`.
pub fn canonical_gram(vz: &WeightModule, fv: &GradedForm, fz: &GradedForm, beta: &[i64]) -> Result<Matrix, ModuleError> {
    let d = vz.dim_at(beta)?;
    if d == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    Ok(canonical_form(vz, fv, fz).blocks[vz.weight_index(beta).unwrap()].clone())
}

/// Kernel basis of a Gram block.
pub fn radical(block: &Matrix) -> Vec<Vec<Scalar>> {
    block.kernel()
}

/// Quotient by the radical of the contravariant form, weight by weight.
pub fn irreducible_quotient(m: &WeightModule) -> Result<WeightModule, ModuleError> {
    let form = contravariant_form(m)?;
    let n = m.rank();
    let mut keep: Vec<usize> = Vec::new();
    let mut sel: Vec<Vec<usize>> = vec![Vec::new(); m.num_weights()];
    let mut proj: Vec<Option<Matrix>> = vec![None; m.num_weights()];
    for w in 0..m.num_weights() {
        let g = form.block(w);
        let (_, piv) = g.rref();
        if piv.is_empty() {
            continue;
        }
        let gi = g.select_rows(&piv).select_cols(&piv).inverse()?;
        proj[w] = Some(gi.mul(&g.select_rows(&piv)));
        sel[w] = piv;
        keep.push(w);
    }
    let weights: Vec<Vec<i64>> = keep.iter().map(|&w| m.weights()[w].clone()).collect();
    let labels: Vec<Vec<Label>> = keep.iter().map(|&w| sel[w].iter().map(|&k| m.labels(w)[k].clone()).collect()).collect();
    let rs = m.root_system().clone();
    let mut e = vec![Vec::new(); n];
    let mut f = vec![Vec::new(); n];
    for &w in &keep {
        let beta = &m.weights()[w];
        for i in 0..n {
            let a = rs.simple_root(i);
            let down: Vec<i64> = beta.iter().zip(&a).map(|(x, y)| x - y).collect();
            let blk = match m.weight_index(&down).and_then(|t| proj[t].as_ref().map(|p| (t, p))) {
                Some((_, p)) => p.mul(&m.e_block(i, w).select_cols(&sel[w])),
                None => Matrix::zeros(0, sel[w].len()),
            };
            e[i].push(blk);
            let up: Vec<i64> = beta.iter().zip(&a).map(|(x, y)| x + y).collect();
            let fb = match m.f_block(i, w) {
                Err(_) => None,
                Ok(fm) => Some(match m.weight_index(&up).and_then(|t| proj[t].as_ref()) {
                    Some(p) => p.mul(&fm.select_cols(&sel[w])),
                    None => Matrix::zeros(0, sel[w].len()),
                }),
            };
            f[i].push(fb);
        }
    }
    Ok(WeightModule::from_parts(m, Kind::Quotient, weights, labels, e, f))
}

#[cfg(test)]
mod tests;
