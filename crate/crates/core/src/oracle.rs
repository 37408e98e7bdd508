//! Independent checks: classical characters and tensor decompositions,
//! brute-force evaluation of the contravariant form by straightening words,
//! and finite-depth evidence that singular vectors generate a tensor product.

use std::collections::BTreeMap;

use crate::forms::{involution_on_word, Involution, Letter};
use crate::linalg::Matrix;
use crate::modules::{ModuleError, Weight, WeightModule};
use crate::rootdata::{RootSystem, Q};
use crate::scalars::{Field, Scalar, ScalarError};
use crate::twist::singular_space;

/// Weight multiplicities keyed by `beta` with weight `top - beta` (simple-root coordinates).
pub type CharacterVector = BTreeMap<Vec<i64>, u64>;

fn q(n: i64) -> Q {
    Q::from_integer(n)
}

/// `(lambda, beta)` for `lambda` with the given labels.
fn ip_top(rs: &RootSystem, labels: &[i64], beta: &[i64]) -> Q {
    let g = rs.simple_gram();
    (0..rs.rank()).fold(q(0), |s, i| s + q(beta[i]) * q(labels[i]) * g[i][i] / q(2))
}

/// Freudenthal multiplicities of the irreducible module with dominant
/// integral highest weight `labels`.
pub fn weyl_character(rs: &RootSystem, labels: &[i64]) -> CharacterVector {
    let n = rs.rank();
    let roots = rs.positive_roots().to_vec();
    let rho = rs.rho().to_vec();
    let mut mult: CharacterVector = BTreeMap::new();
    mult.insert(vec![0; n], 1);
    let mut layer: Vec<Vec<i64>> = vec![vec![0; n]];
    loop {
        let mut next: Vec<Vec<i64>> = Vec::new();
        for b in &layer {
            for i in 0..n {
                let mut c = b.clone();
                c[i] += 1;
                if !next.contains(&c) {
                    next.push(c);
                }
            }
        }
        next.sort();
        let mut found = Vec::new();
        for beta in next {
            // 2(lambda + rho, beta) - (beta, beta)
            let lhs = q(2) * (ip_top(rs, labels, &beta) + rs.ip(&rho, &beta)) - rs.ip(&beta, &beta);
            if lhs <= q(0) {
                continue;
            }
            let mut rhs = q(0);
            for a in &roots {
                let mut k = 1;
                loop {
                    let gamma: Vec<i64> = beta.iter().zip(a).map(|(x, y)| x - k * y).collect();
                    if gamma.iter().any(|&x| x < 0) {
                        break;
                    }
                    if let Some(&m) = mult.get(&gamma) {
                        // (mu + k a, a) with mu = lambda - beta
                        let p = ip_top(rs, labels, a) - rs.ip(&gamma, a);
                        rhs += q(2) * p * q(m as i64);
                    }
                    k += 1;
                }
            }
            let m = rhs / lhs;
            assert!(m.is_integer() && m >= q(0), "Freudenthal produced {}", m);
            if m > q(0) {
                found.push((beta, m.to_integer() as u64));
            }
        }
        if found.is_empty() {
            break;
        }
        layer = found.iter().map(|(b, _)| b.clone()).collect();
        mult.extend(found);
    }
    mult
}

/// Weyl dimension formula.
pub fn weyl_dimension(rs: &RootSystem, labels: &[i64]) -> u64 {
    let rho = rs.rho().to_vec();
    let mut num = q(1);
    let mut den = q(1);
    for a in rs.positive_roots() {
        num *= ip_top(rs, labels, a) + rs.ip(&rho, a);
        den *= rs.ip(&rho, a);
    }
    let d = num / den;
    assert!(d.is_integer());
    d.to_integer() as u64
}

/// Labels of the weight `top - beta` for a top weight with labels `top`.
pub fn labels_below(rs: &RootSystem, top: &[i64], beta: &[i64]) -> Vec<i64> {
    let c = rs.cartan();
    (0..rs.rank()).map(|i| top[i] - (0..rs.rank()).map(|j| beta[j] * c[i][j]).sum::<i64>()).collect()
}

/// Highest weights (as `beta` keys below `a + b`) with multiplicities in `V(a) (x) V(b)`.
pub fn tensor_decompose(rs: &RootSystem, a: &[i64], b: &[i64]) -> BTreeMap<Vec<i64>, u64> {
    let ca = weyl_character(rs, a);
    let cb = weyl_character(rs, b);
    let mut prod: BTreeMap<Vec<i64>, i64> = BTreeMap::new();
    for (x, m) in &ca {
        for (y, k) in &cb {
            let s: Vec<i64> = x.iter().zip(y).map(|(p, r)| p + r).collect();
            *prod.entry(s).or_insert(0) += (m * k) as i64;
        }
    }
    let top: Vec<i64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
    let mut out = BTreeMap::new();
    loop {
        prod.retain(|_, m| *m != 0);
        let Some(beta) = prod.keys().min_by_key(|k| (k.iter().sum::<i64>(), (*k).clone())).cloned() else { break };
        let m = prod[&beta];
        assert!(m > 0, "negative multiplicity at {:?}", beta);
        let hw = labels_below(rs, &top, &beta);
        assert!(hw.iter().all(|&x| x >= 0), "stripped weight is not dominant");
        for (g, k) in weyl_character(rs, &hw) {
            let s: Vec<i64> = beta.iter().zip(&g).map(|(p, r)| p + r).collect();
            *prod.entry(s).or_insert(0) -= m * k as i64;
        }
        out.insert(beta, m as u64);
    }
    out
}

/// `zeta(wp(x))` for a weight-zero word `x`, evaluated on the highest-weight
/// vector of weight `top` by pushing every `e` to the right.
pub fn wp_value(rs: &RootSystem, field: &Field, top: &Weight, terms: &[(Scalar, Vec<Letter>)]) -> Result<Scalar, ScalarError> {
    let chars = top.chars(rs, field)?;
    let mut total = Scalar::zero();
    for (c, w) in terms {
        // state: coefficient times a free word in the f's (leftmost first)
        let mut state: Vec<(Scalar, Vec<usize>)> = vec![(c.clone(), Vec::new())];
        for l in w.iter().rev() {
            let mut next = Vec::new();
            for (s, fw) in state {
                match *l {
                    Letter::F(i) => {
                        let mut v = vec![i];
                        v.extend(&fw);
                        next.push((s, v));
                    }
                    Letter::K(i, n) => {
                        next.push((s.mul(&char_on(rs, field, &chars, &fw, i)?.pow(n)), fw));
                    }
                    Letter::E(i) => {
                        let a = rs.simple_root(i);
                        let qi = field.q_pow(rs.q_exp(&a))?;
                        let den = qi.sub(&qi.inv()?);
                        for p in 0..fw.len() {
                            if fw[p] != i {
                                continue;
                            }
                            let tail = &fw[p + 1..];
                            let k = char_on(rs, field, &chars, tail, i)?;
                            let br = k.sub(&k.inv()?).div(&den)?;
                            let mut v = fw[..p].to_vec();
                            v.extend(tail);
                            next.push((s.mul(&br), v));
                        }
                    }
                }
            }
            state = next;
        }
        for (s, fw) in state {
            if fw.is_empty() {
                total = total.add(&s);
            }
        }
    }
    Ok(total)
}

/// `q^{(mu, a_i)}` on the vector `f_word 1`.
fn char_on(rs: &RootSystem, field: &Field, chars: &[Scalar], word: &[usize], i: usize) -> Result<Scalar, ScalarError> {
    let a = rs.simple_root(i);
    let mut down = q(0);
    for &j in word {
        down += rs.ip(&rs.simple_root(j), &a);
    }
    Ok(chars[i].mul(&field.q_pow(-down)?))
}

/// Gram matrix of the vectors `f_w 1` (`w` read left to right as a product)
/// computed as `zeta(wp(omega(f_x) f_y))`.
pub fn wp_gram(rs: &RootSystem, field: &Field, top: &Weight, words: &[Vec<usize>]) -> Result<Matrix, ScalarError> {
    let n = words.len();
    let mut g = Matrix::zeros(n, n);
    for (a, x) in words.iter().enumerate() {
        let fx: Vec<Letter> = x.iter().map(|&i| Letter::F(i)).collect();
        let ox = involution_on_word(Involution::Omega, &fx);
        for (b, y) in words.iter().enumerate() {
            let terms: Vec<(Scalar, Vec<Letter>)> = ox
                .terms
                .iter()
                .map(|(c, w)| {
                    let mut w = w.clone();
                    w.extend(y.iter().map(|&i| Letter::F(i)));
                    (c.clone(), w)
                })
                .collect();
            g.set(a, b, wp_value(rs, field, top, &terms)?);
        }
    }
    Ok(g)
}

/// All words in the `f_i` of a given length.
pub fn words_of_length(rank: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..len {
        out = out.into_iter().flat_map(|w| (0..rank).map(move |i| {
            let mut v = w.clone();
            v.push(i);
            v
        })).collect();
    }
    out
}

#[derive(Clone, Debug)]
pub struct Coverage {
    pub beta: Vec<i64>,
    pub spanned: usize,
    pub dim: usize,
}

#[derive(Clone, Debug)]
pub struct SpanEvidence {
    pub weights: Vec<Coverage>,
}

impl SpanEvidence {
    pub fn full(&self) -> bool {
        self.weights.iter().all(|c| c.spanned == c.dim)
    }

    pub fn gaps(&self) -> Vec<&Coverage> {
        self.weights.iter().filter(|c| c.spanned < c.dim).collect()
    }
}

/// Dimension of the span of `U(n_-)` applied to singular vectors, weight by
/// weight, against the full weight-space dimension (weights up to `depth`).
pub fn submodule_span_evidence(vz: &WeightModule, depth: usize) -> Result<SpanEvidence, ModuleError> {
    let rs = vz.root_system().clone();
    let mut spans: Vec<Option<Matrix>> = vec![None; vz.num_weights()];
    let mut out = Vec::new();
    for w in 0..vz.num_weights() {
        let beta = vz.weights()[w].clone();
        if beta.iter().sum::<i64>() as usize > depth {
            continue;
        }
        let d = vz.dim(w);
        let sing = singular_space(vz, &beta).map_err(|e| ModuleError::Unsupported(e.to_string()))?;
        let mut cols = sing.basis.clone();
        for i in 0..rs.rank() {
            let src: Vec<i64> = beta.iter().zip(rs.simple_root(i)).map(|(x, y)| x - y).collect();
            if let Some(sw) = vz.weight_index(&src) {
                if let Some(s) = &spans[sw] {
                    cols = cols.hstack(&vz.f_block(i, sw)?.mul(s));
                }
            }
        }
        let basis = if cols.cols() == 0 { Matrix::zeros(d, 0) } else { {
            let (_, piv) = cols.rref();
            cols.select_cols(&piv)
        } };
        out.push(Coverage { beta, spanned: basis.cols(), dim: d });
        spans[w] = Some(basis);
    }
    Ok(SpanEvidence { weights: out })
}
