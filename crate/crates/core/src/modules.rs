//! Weight-graded highest-weight modules given by explicit action blocks.
//!
//! Weights are recorded relative to the highest weight: the weight space with
//! key `beta` (simple-root coordinates, nonnegative) has weight `top - beta`.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::One;
use thiserror::Error;

use crate::linalg::Matrix;
use crate::rootdata::{RootSystem, Q};
use crate::scalars::{specialize, Field, Scalar, ScalarError, Var};

#[derive(Debug, Error)]
pub enum ModuleError {
    #[error("weight {beta:?} lies outside the stored range (depth {depth}); increase the depth")]
    DepthExceeded { beta: Vec<i64>, depth: usize },
    #[error("highest weight is not integral on simple root {0}")]
    NotIntegral(usize),
    #[error("highest weight is not dominant on simple root {0}")]
    NotDominant(usize),
    #[error("module is not finite-dimensional within height {0}")]
    NotFinite(usize),
    #[error("incompatible modules: {0}")]
    Incompatible(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("relation check failed: {0}")]
    RelationFailed(String),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// A highest weight: numeric labels `(lambda, a_i^v)` plus an optional symbolic
/// character generator per simple root, so that
/// `q^{(lambda, a_i)} = q^{labels_i (a_i,a_i)/2} * z`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Weight {
    pub labels: Vec<Q>,
    pub symbolic: Vec<Option<Var>>,
}

impl Weight {
    pub fn integral(labels: &[i64]) -> Self {
        Weight { labels: labels.iter().map(|&x| Q::from_integer(x)).collect(), symbolic: vec![None; labels.len()] }
    }

    /// Fully generic weight: one character generator `z_i` per simple root.
    pub fn generic(rank: usize) -> Self {
        Weight { labels: vec![Q::from_integer(0); rank], symbolic: (0..rank).map(|i| Some(Var::z(i))).collect() }
    }

    /// `xi + lambda` with `lambda` generic on the simple roots outside `levi`.
    pub fn parabolic(xi: &[i64], levi: &[usize]) -> Self {
        let mut w = Weight::integral(xi);
        for i in 0..xi.len() {
            if !levi.contains(&i) {
                w.symbolic[i] = Some(Var::z(i));
            }
        }
        w
    }

    pub fn rank(&self) -> usize {
        self.labels.len()
    }

    pub fn is_symbolic(&self) -> bool {
        self.symbolic.iter().any(|s| s.is_some())
    }

    /// Integer labels when the weight is numeric and integral.
    pub fn integral_labels(&self) -> Option<Vec<i64>> {
        if self.is_symbolic() {
            return None;
        }
        self.labels.iter().map(|x| if x.is_integer() { Some(x.to_integer()) } else { None }).collect()
    }

    /// Numeric part of `(lambda, mu)` for `mu` in simple-root coordinates.
    pub fn ip_numeric(&self, rs: &RootSystem, mu: &[i64]) -> Q {
        let g = rs.simple_gram();
        (0..self.rank()).fold(Q::from_integer(0), |s, i| s + Q::from_integer(mu[i]) * self.labels[i] * g[i][i] / 2)
    }

    pub fn add(&self, o: &Weight) -> Result<Weight, ModuleError> {
        let mut symbolic = self.symbolic.clone();
        for i in 0..self.rank() {
            match (symbolic[i], o.symbolic[i]) {
                (Some(a), Some(b)) if a != b => {
                    return Err(ModuleError::Incompatible("both factors carry symbolic characters".into()))
                }
                (Some(_), Some(_)) => {
                    return Err(ModuleError::Incompatible("both factors carry symbolic characters".into()))
                }
                (None, b) => symbolic[i] = b,
                _ => {}
            }
        }
        Ok(Weight { labels: self.labels.iter().zip(&o.labels).map(|(a, b)| a + b).collect(), symbolic })
    }

    /// Characters `q^{(lambda, a_i)}` in the given field.
    pub fn chars(&self, rs: &RootSystem, field: &Field) -> Result<Vec<Scalar>, ScalarError> {
        (0..self.rank())
            .map(|i| {
                let e = field.u_exponent(self.ip_numeric(rs, &rs.simple_root(i)))?;
                let mut exps = vec![(Var::U, e)];
                if let Some(z) = self.symbolic[i] {
                    exps.push((z, 1));
                }
                Ok(field.monomial(&BigRational::one(), &exps))
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Verma,
    Parabolic,
    Finite,
    Sphere,
    Quotient,
    Tensor,
}

/// Basis labels.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Label {
    /// `f_{w0} f_{w1} ... 1` (leftmost generator applied last).
    Word(Vec<usize>),
    /// `v_(weight, index) (x) z_(weight, index)` in factor bases.
    Pair { v: (usize, usize), z: (usize, usize) },
    /// `f_{e1}^{m1} ... f_{en}^{mn} 1` for the sphere base module.
    Sphere(Vec<u32>),
}

/// How far a module is stored: all keys `beta` with `grade . beta <= depth`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Truncation {
    pub grade: Vec<i64>,
    pub depth: Option<usize>,
}

impl Truncation {
    pub fn height(rank: usize, depth: usize) -> Self {
        Truncation { grade: vec![1; rank], depth: Some(depth) }
    }

    pub fn complete(rank: usize) -> Self {
        Truncation { grade: vec![1; rank], depth: None }
    }

    pub fn contains(&self, beta: &[i64]) -> bool {
        match self.depth {
            None => true,
            Some(d) => self.grade_of(beta) <= d as i64,
        }
    }

    pub fn grade_of(&self, beta: &[i64]) -> i64 {
        beta.iter().zip(&self.grade).map(|(a, b)| a * b).sum()
    }
}

/// A weight vector: key `beta` and coordinates in that weight space's basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WVec {
    pub beta: Vec<i64>,
    pub coords: Vec<Scalar>,
}

impl WVec {
    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|x| x.is_zero())
    }

    pub fn add(&self, o: &WVec) -> WVec {
        assert_eq!(self.beta, o.beta, "adding vectors of different weights");
        WVec { beta: self.beta.clone(), coords: self.coords.iter().zip(&o.coords).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn scale(&self, s: &Scalar) -> WVec {
        WVec { beta: self.beta.clone(), coords: self.coords.iter().map(|a| a.mul(s)).collect() }
    }
}

fn vadd(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn vsub(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[derive(Clone, Debug)]
pub struct WeightModule {
    rs: Arc<RootSystem>,
    field: Field,
    top: Weight,
    chars: Vec<Scalar>,
    kind: Kind,
    trunc: Truncation,
    weights: Vec<Vec<i64>>,
    index: HashMap<Vec<i64>, usize>,
    labels: Vec<Vec<Label>>,
    /// `e[i][w]`: block `M[w] -> M[w - a_i]` (zero rows when that is not a weight).
    e: Vec<Vec<Matrix>>,
    /// `f[i][w]`: block `M[w] -> M[w + a_i]`; `None` beyond the stored range.
    f: Vec<Vec<Option<Matrix>>>,
}

impl WeightModule {
    pub fn root_system(&self) -> &Arc<RootSystem> {
        &self.rs
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn highest_weight(&self) -> &Weight {
        &self.top
    }

    pub fn top_chars(&self) -> &[Scalar] {
        &self.chars
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn truncation(&self) -> &Truncation {
        &self.trunc
    }

    pub fn is_complete(&self) -> bool {
        self.trunc.depth.is_none()
    }

    pub fn rank(&self) -> usize {
        self.rs.rank()
    }

    pub fn weights(&self) -> &[Vec<i64>] {
        &self.weights
    }

    pub fn num_weights(&self) -> usize {
        self.weights.len()
    }

    pub fn weight_index(&self, beta: &[i64]) -> Option<usize> {
        self.index.get(beta).copied()
    }

    /// Dimension of the weight space `top - beta`; errors outside storage.
    pub fn dim_at(&self, beta: &[i64]) -> Result<usize, ModuleError> {
        if !self.stores(beta) {
            return Err(self.depth_error(beta));
        }
        Ok(self.weight_index(beta).map(|w| self.dim(w)).unwrap_or(0))
    }

    pub fn dim(&self, w: usize) -> usize {
        self.labels[w].len()
    }

    pub fn total_dim(&self) -> usize {
        self.labels.iter().map(|l| l.len()).sum()
    }

    pub fn labels(&self, w: usize) -> &[Label] {
        &self.labels[w]
    }

    /// True when `beta` is inside the stored range (it may still have dimension 0).
    pub fn stores(&self, beta: &[i64]) -> bool {
        beta.iter().all(|&x| x >= 0) && self.trunc.contains(beta)
    }

    fn depth_error(&self, beta: &[i64]) -> ModuleError {
        ModuleError::DepthExceeded { beta: beta.to_vec(), depth: self.trunc.depth.unwrap_or(0) }
    }

    /// `q^{(xi, mu)}` on the weight space `xi = top - beta` for `mu` in root coordinates.
    pub fn char_root(&self, beta: &[i64], mu: &[i64]) -> Scalar {
        let mut c = Scalar::one();
        for i in 0..self.rank() {
            if mu[i] != 0 {
                c = c.mul(&self.chars[i].pow(mu[i]));
            }
        }
        let shift = self.rs.ip(beta, mu);
        let corr = self.field.q_pow(-shift).expect("root pairings fit the field");
        c.mul(&corr)
    }

    pub fn char_simple(&self, beta: &[i64], i: usize) -> Scalar {
        self.char_root(beta, &self.rs.simple_root(i))
    }

    /// `[(xi, mu^v) + n]_{q_mu}` on the weight space `xi = top - beta`.
    pub fn bracket(&self, beta: &[i64], mu: &[i64], n: i64) -> Result<Scalar, ScalarError> {
        let chr = self.char_root(beta, mu);
        self.field.qbracket(Q::from_integer(n), Some(&chr), self.rs.q_exp(mu))
    }

    pub fn e_block(&self, i: usize, w: usize) -> &Matrix {
        &self.e[i][w]
    }

    pub fn f_block(&self, i: usize, w: usize) -> Result<&Matrix, ModuleError> {
        self.f[i][w].as_ref().ok_or_else(|| self.depth_error(&vadd(&self.weights[w], &self.rs.simple_root(i))))
    }

    pub fn zero_vec(&self, beta: &[i64]) -> Result<WVec, ModuleError> {
        let d = self.dim_at(beta)?;
        Ok(WVec { beta: beta.to_vec(), coords: vec![Scalar::zero(); d] })
    }

    pub fn basis_vec(&self, w: usize, k: usize) -> WVec {
        let mut coords = vec![Scalar::zero(); self.dim(w)];
        coords[k] = Scalar::one();
        WVec { beta: self.weights[w].clone(), coords }
    }

    pub fn top_vec(&self) -> WVec {
        self.basis_vec(0, 0)
    }

    pub fn apply_e(&self, i: usize, v: &WVec) -> Result<WVec, ModuleError> {
        let target = vsub(&v.beta, &self.rs.simple_root(i));
        match self.weight_index(&v.beta) {
            None => self.zero_vec_or_empty(&target),
            Some(w) => {
                let m = &self.e[i][w];
                Ok(WVec { beta: target, coords: m.mul_vec(&v.coords) })
            }
        }
    }

    pub fn apply_f(&self, i: usize, v: &WVec) -> Result<WVec, ModuleError> {
        let target = vadd(&v.beta, &self.rs.simple_root(i));
        match self.weight_index(&v.beta) {
            None => self.zero_vec(&target),
            Some(w) => {
                let m = self.f_block(i, w)?;
                Ok(WVec { beta: target, coords: m.mul_vec(&v.coords) })
            }
        }
    }

    fn zero_vec_or_empty(&self, beta: &[i64]) -> Result<WVec, ModuleError> {
        if beta.iter().any(|&x| x < 0) {
            return Ok(WVec { beta: beta.to_vec(), coords: vec![] });
        }
        self.zero_vec(beta)
    }

    /// `q^{h_mu}` acting on a weight vector.
    pub fn apply_k(&self, mu: &[i64], v: &WVec) -> WVec {
        v.scale(&self.char_root(&v.beta, mu))
    }

    /// Block of a generator word on `M[w]`, rightmost letter first.
    pub fn word_block(&self, word: &[Gen], beta: &[i64]) -> Result<(Vec<i64>, Matrix), ModuleError> {
        let d = self.dim_at(beta)?;
        let mut cur = beta.to_vec();
        let mut m = Matrix::identity(d);
        for g in word.iter().rev() {
            let (next, block) = match *g {
                Gen::E(i) => {
                    let next = vsub(&cur, &self.rs.simple_root(i));
                    let rows = if next.iter().any(|&x| x < 0) { 0 } else { self.dim_at(&next)? };
                    let b = match self.weight_index(&cur) {
                        Some(w) => self.e[i][w].clone(),
                        None => Matrix::zeros(rows, 0),
                    };
                    (next, b)
                }
                Gen::F(i) => {
                    let next = vadd(&cur, &self.rs.simple_root(i));
                    let rows = self.dim_at(&next)?;
                    let b = match self.weight_index(&cur) {
                        Some(w) => self.f_block(i, w)?.clone(),
                        None => Matrix::zeros(rows, 0),
                    };
                    (next, b)
                }
            };
            m = block.mul(&m);
            cur = next;
        }
        Ok((cur, m))
    }

    /// Checks the defining relations blockwise on every stored weight where
    /// all touched weights are stored.
    pub fn validate_relations(&self) -> Result<(), ModuleError> {
        let n = self.rank();
        let fail = |s: String| Err(ModuleError::RelationFailed(s));
        for w in 0..self.num_weights() {
            let beta = self.weights[w].clone();
            for i in 0..n {
                for j in 0..n {
                    let ef = self.word_block(&[Gen::E(i), Gen::F(j)], &beta);
                    let fe = self.word_block(&[Gen::F(j), Gen::E(i)], &beta);
                    if let (Ok((_, a)), Ok((_, b))) = (ef, fe) {
                        let lhs = a.sub(&b);
                        let ok = if i == j {
                            let c = self.bracket(&beta, &self.rs.simple_root(i), 0)?;
                            lhs == Matrix::identity(self.dim(w)).scale(&c)
                        } else {
                            lhs.is_zero()
                        };
                        if !ok {
                            return fail(format!("[e{}, f{}] on {:?}", i + 1, j + 1, beta));
                        }
                    }
                    if i == j {
                        continue;
                    }
                    let a = self.rs.cartan()[i][j];
                    let m = (1 - a) as usize;
                    let base = self.rs.q_exp(&self.rs.simple_root(i));
                    for gen in [Gen::E as fn(usize) -> Gen, Gen::F] {
                        let mut acc: Option<Matrix> = None;
                        let mut defined = true;
                        for k in 0..=m {
                            let mut word = vec![gen(i); k];
                            word.push(gen(j));
                            word.extend(vec![gen(i); m - k]);
                            match self.word_block(&word, &beta) {
                                Ok((_, blk)) => {
                                    let c = qbinom(&self.field, m as i64, k as i64, base)?;
                                    let c = if k % 2 == 1 { c.neg() } else { c };
                                    let t = blk.scale(&c);
                                    acc = Some(match acc {
                                        None => t,
                                        Some(x) => x.add(&t),
                                    });
                                }
                                Err(_) => {
                                    defined = false;
                                    break;
                                }
                            }
                        }
                        if defined && !acc.map(|x| x.is_zero()).unwrap_or(true) {
                            return fail(format!("Serre relation ({}, {}) on {:?}", i + 1, j + 1, beta));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Substitutes values for variables in every block and character.
    pub fn specialize(&self, field: &Field, assignment: &[(Var, Scalar)]) -> Result<WeightModule, ModuleError> {
        let sp = |s: &Scalar| specialize(s, assignment);
        let mut out = self.clone();
        out.field = field.clone();
        out.chars = self.chars.iter().map(sp).collect::<Result<_, _>>()?;
        for i in 0..self.rank() {
            for w in 0..self.num_weights() {
                out.e[i][w] = self.e[i][w].try_map(sp)?;
                if let Some(m) = &self.f[i][w] {
                    out.f[i][w] = Some(m.try_map(sp)?);
                }
            }
        }
        Ok(out)
    }

    /// Rebuilds the module on a new basis: `basis[w]` has columns giving the
    /// new basis vectors of `M[w]` in old coordinates (must be invertible).
    pub fn change_basis(&self, basis: &[Matrix], labels: Vec<Vec<Label>>) -> Result<WeightModule, ModuleError> {
        let inv: Vec<Matrix> = basis.iter().map(|b| b.inverse()).collect::<Result<_, _>>()?;
        let mut out = self.clone();
        out.labels = labels;
        for i in 0..self.rank() {
            for w in 0..self.num_weights() {
                let beta = &self.weights[w];
                let down = vsub(beta, &self.rs.simple_root(i));
                if let Some(t) = self.weight_index(&down) {
                    out.e[i][w] = inv[t].mul(&self.e[i][w]).mul(&basis[w]);
                }
                let up = vadd(beta, &self.rs.simple_root(i));
                if let (Some(t), Some(m)) = (self.weight_index(&up), &self.f[i][w]) {
                    out.f[i][w] = Some(inv[t].mul(m).mul(&basis[w]));
                }
            }
        }
        Ok(out)
    }

    /// Internal constructor for modules assembled elsewhere (quotients).
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        base: &WeightModule,
        kind: Kind,
        weights: Vec<Vec<i64>>,
        labels: Vec<Vec<Label>>,
        e: Vec<Vec<Matrix>>,
        f: Vec<Vec<Option<Matrix>>>,
    ) -> WeightModule {
        let index = weights.iter().enumerate().map(|(k, b)| (b.clone(), k)).collect();
        WeightModule {
            rs: base.rs.clone(),
            field: base.field.clone(),
            top: base.top.clone(),
            chars: base.chars.clone(),
            kind,
            trunc: base.trunc.clone(),
            weights,
            index,
            labels,
            e,
            f,
        }
    }
}

/// A Chevalley generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gen {
    E(usize),
    F(usize),
}

/// Gaussian binomial `[m choose k]_{q^{base}}`.
pub fn qbinom(field: &Field, m: i64, k: i64, base: Q) -> Result<Scalar, ScalarError> {
    let num = field.qfactorial(m, base)?;
    let den = field.qfactorial(k, base)?.mul(&field.qfactorial(m - k, base)?);
    num.div(&den)
}

const MAX_HEIGHT: usize = 400;

/// Irreducible highest-weight module with the given characters, truncated.
///
/// A vector of positive depth vanishes iff every `e_j` kills it, so each weight
/// space is identified with the span of the `e`-images of its `f_i`-candidates.
fn build_irreducible(
    rs: Arc<RootSystem>,
    field: Field,
    top: Weight,
    kind: Kind,
    trunc: Truncation,
) -> Result<WeightModule, ModuleError> {
    let n = rs.rank();
    let chars = top.chars(&rs, &field)?;
    let zero = vec![0i64; n];
    let mut m = WeightModule {
        rs: rs.clone(),
        field,
        top,
        chars,
        kind,
        trunc,
        weights: vec![zero.clone()],
        index: HashMap::from([(zero, 0)]),
        labels: vec![vec![Label::Word(vec![])]],
        e: vec![vec![Matrix::zeros(0, 1)]; n],
        f: vec![vec![None]; n],
    };
    let mut prev: Vec<usize> = vec![0];
    for h in 1.. {
        if h > MAX_HEIGHT {
            return Err(ModuleError::NotFinite(MAX_HEIGHT));
        }
        let mut targets: BTreeSet<Vec<i64>> = BTreeSet::new();
        for &w in &prev {
            for i in 0..n {
                let t = vadd(&m.weights[w], &rs.simple_root(i));
                if m.trunc.contains(&t) {
                    targets.insert(t);
                }
            }
        }
        // deterministic order: reverse lexicographic keys
        let targets: Vec<Vec<i64>> = targets.into_iter().rev().collect();
        let mut level = Vec::new();
        let mut pending_f: Vec<(usize, usize, Matrix)> = Vec::new();
        for t in targets {
            let built = build_weight_space(&m, &t)?;
            match built {
                None => {
                    for i in 0..n {
                        let s = vsub(&t, &rs.simple_root(i));
                        if let Some(sw) = m.weight_index(&s) {
                            pending_f.push((i, sw, Matrix::zeros(0, m.dim(sw))));
                        }
                    }
                }
                Some((labels, eblocks, fblocks)) => {
                    let idx = m.weights.len();
                    m.weights.push(t.clone());
                    m.index.insert(t.clone(), idx);
                    m.labels.push(labels);
                    for i in 0..n {
                        m.e[i].push(eblocks[i].clone());
                        m.f[i].push(None);
                    }
                    for (i, sw, blk) in fblocks {
                        pending_f.push((i, sw, blk));
                    }
                    level.push(idx);
                }
            }
        }
        for (i, sw, blk) in pending_f {
            m.f[i][sw] = Some(blk);
        }
        // f-blocks into weights that were never candidates are zero when inside the range
        for &w in &prev {
            for i in 0..n {
                if m.f[i][w].is_none() {
                    let t = vadd(&m.weights[w], &rs.simple_root(i));
                    if m.trunc.contains(&t) {
                        let rows = m.weight_index(&t).map(|k| m.dim(k)).unwrap_or(0);
                        m.f[i][w] = Some(Matrix::zeros(rows, m.dim(w)));
                    }
                }
            }
        }
        if level.is_empty() {
            break;
        }
        prev = level;
    }
    // finite modules: everything below the last level is zero
    if m.trunc.depth.is_none() {
        for i in 0..n {
            for w in 0..m.num_weights() {
                if m.f[i][w].is_none() {
                    m.f[i][w] = Some(Matrix::zeros(0, m.dim(w)));
                }
            }
        }
    }
    Ok(m)
}

type SpaceData = (Vec<Label>, Vec<Matrix>, Vec<(usize, usize, Matrix)>);

fn build_weight_space(m: &WeightModule, t: &[i64]) -> Result<Option<SpaceData>, ModuleError> {
    let rs = m.rs.clone();
    let n = rs.rank();
    // candidates f_i b for basis vectors b of M[t - a_i]
    struct Cand {
        i: usize,
        src: usize,
        k: usize,
        word: Vec<usize>,
    }
    let mut cands: Vec<Cand> = Vec::new();
    for i in 0..n {
        let s = vsub(t, &rs.simple_root(i));
        if let Some(sw) = m.weight_index(&s) {
            for k in 0..m.dim(sw) {
                let Label::Word(wd) = &m.labels[sw][k] else { unreachable!() };
                let mut word = vec![i];
                word.extend(wd.iter().copied());
                cands.push(Cand { i, src: sw, k, word });
            }
        }
    }
    if cands.is_empty() {
        return Ok(None);
    }
    cands.sort_by(|a, b| a.word.cmp(&b.word));
    // row offsets: one block per e_j, landing in M[t - a_j]
    let mut offsets = Vec::with_capacity(n);
    let mut rows = 0;
    let mut tj_idx = Vec::with_capacity(n);
    for j in 0..n {
        let tj = vsub(t, &rs.simple_root(j));
        let d = m.weight_index(&tj).map(|w| m.dim(w)).unwrap_or(0);
        offsets.push(rows);
        rows += d;
        tj_idx.push(m.weight_index(&tj));
    }
    // cache F_i(s - a_j) E_j(s) blocks per (i, j)
    let mut cache: HashMap<(usize, usize), Matrix> = HashMap::new();
    let mut sig = Matrix::zeros(rows, cands.len());
    for (c, cand) in cands.iter().enumerate() {
        let s = &m.weights[cand.src];
        for j in 0..n {
            let Some(_) = tj_idx[j] else { continue };
            let key = (cand.i, j);
            if !cache.contains_key(&key) {
                let below = vsub(s, &rs.simple_root(j));
                let blk = match m.weight_index(&below) {
                    Some(bw) => {
                        let fb = m.f[cand.i][bw]
                            .as_ref()
                            .expect("f-blocks of the previous level are filled")
                            .clone();
                        fb.mul(&m.e[j][cand.src])
                    }
                    None => Matrix::zeros(m.dim(tj_idx[j].unwrap()), m.dim(cand.src)),
                };
                let blk = if j == cand.i {
                    let c = m.bracket(s, &rs.simple_root(j), 0)?;
                    blk.add(&Matrix::identity(m.dim(cand.src)).scale(&c))
                } else {
                    blk
                };
                cache.insert(key, blk);
            }
            let blk = &cache[&key];
            for r in 0..blk.rows() {
                sig.set(offsets[j] + r, c, blk.get(r, cand.k).clone());
            }
        }
    }
    let (red, pivots) = sig.rref();
    let r = pivots.len();
    if r == 0 {
        return Ok(None);
    }
    let labels: Vec<Label> = pivots.iter().map(|&p| Label::Word(cands[p].word.clone())).collect();
    let mut eblocks = Vec::with_capacity(n);
    for j in 0..n {
        let d = tj_idx[j].map(|w| m.dim(w)).unwrap_or(0);
        let mut blk = Matrix::zeros(d, r);
        for rr in 0..d {
            for (col, &p) in pivots.iter().enumerate() {
                blk.set(rr, col, sig.get(offsets[j] + rr, p).clone());
            }
        }
        eblocks.push(blk);
    }
    let mut fblocks = Vec::new();
    for i in 0..n {
        let s = vsub(t, &rs.simple_root(i));
        let Some(sw) = m.weight_index(&s) else { continue };
        let mut blk = Matrix::zeros(r, m.dim(sw));
        for (c, cand) in cands.iter().enumerate() {
            if cand.i != i {
                continue;
            }
            for rr in 0..r {
                blk.set(rr, cand.k, red.get(rr, c).clone());
            }
        }
        fblocks.push((i, sw, blk));
    }
    Ok(Some((labels, eblocks, fblocks)))
}

/// Verma module `M_lambda` truncated at height `depth`.
pub fn build_verma(rs: &Arc<RootSystem>, field: &Field, top: Weight, depth: usize) -> Result<WeightModule, ModuleError> {
    if top.rank() != rs.rank() {
        return Err(ModuleError::Incompatible("weight rank differs from the root system rank".into()));
    }
    build_irreducible(rs.clone(), field.clone(), top, Kind::Verma, Truncation::height(rs.rank(), depth))
}

/// Parabolic Verma module for the Levi subalgebra with simple roots `levi`,
/// highest weight `xi + lambda` with `lambda` generic in the center dual.
pub fn build_parabolic_verma(
    rs: &Arc<RootSystem>,
    field: &Field,
    levi: &[usize],
    top: Weight,
    depth: usize,
) -> Result<WeightModule, ModuleError> {
    for &i in levi {
        if top.symbolic[i].is_some() {
            return Err(ModuleError::Unsupported(format!("weight is symbolic on Levi root {}", i + 1)));
        }
        let l = top.labels[i];
        if !l.is_integer() {
            return Err(ModuleError::NotIntegral(i));
        }
        if l < Q::from_integer(0) {
            return Err(ModuleError::NotDominant(i));
        }
    }
    let kind = if levi.is_empty() { Kind::Verma } else { Kind::Parabolic };
    build_irreducible(rs.clone(), field.clone(), top, kind, Truncation::height(rs.rank(), depth))
}

/// Finite-dimensional irreducible module of dominant integral highest weight.
pub fn build_finite_dim(rs: &Arc<RootSystem>, field: &Field, nu: &[i64]) -> Result<WeightModule, ModuleError> {
    for (i, &l) in nu.iter().enumerate() {
        if l < 0 {
            return Err(ModuleError::NotDominant(i));
        }
    }
    build_irreducible(rs.clone(), field.clone(), Weight::integral(nu), Kind::Finite, Truncation::complete(rs.rank()))
}

/// The relation `z^2 = -q^{-1}` used for the sphere base module (`q = u^2`).
pub fn sphere_relation() -> crate::scalars::Relation {
    crate::scalars::Relation { var: Var::z(0), n: 2, sign: -1, u_exp: -2 }
}

/// Field suitable for the sphere base module of `so(2n+1)`.
pub fn sphere_field() -> Field {
    Field::new(2).with_relations(vec![sphere_relation()])
}

/// Base module of the even quantum sphere for `so(2n+1)`: highest weight with
/// `q^{2(lambda, e_i)} = -q^{-1}`, basis `f_{e1}^{m1} ... f_{en}^{mn} 1` with
/// `m1 + ... + mn <= depth`.
pub fn build_sphere_base(
    rs: &Arc<RootSystem>,
    field: &Field,
    depth: usize,
) -> Result<WeightModule, ModuleError> {
    let n = rs.rank();
    if rs.root_type() != crate::rootdata::RootType::B {
        return Err(ModuleError::Unsupported("the sphere base module needs type B".into()));
    }
    if field.m() % 2 != 0 || field.extension().map(|e| e.relations().first() != Some(&sphere_relation())).unwrap_or(true) {
        return Err(ModuleError::Unsupported("field must carry the relation z1^2 = -q^-1 with even M".into()));
    }
    let mut top = Weight::integral(&vec![0; n]);
    top.symbolic[0] = Some(Var::z(0));
    let mut grade = vec![0; n];
    grade[0] = 1;
    let trunc = Truncation { grade, depth: Some(depth) };
    let m = build_irreducible(rs.clone(), field.clone(), top, Kind::Sphere, trunc)?;
    // rebase onto the monomial basis
    let mut basis = Vec::with_capacity(m.num_weights());
    let mut labels = Vec::with_capacity(m.num_weights());
    for w in 0..m.num_weights() {
        let beta = m.weights[w].clone();
        if m.dim(w) != 1 {
            return Err(ModuleError::RelationFailed(format!("sphere weight space {:?} has dimension {}", beta, m.dim(w))));
        }
        let mult: Vec<u32> = (0..n).map(|i| (beta[i] - if i + 1 < n { beta[i + 1] } else { 0 }) as u32).collect();
        let v = sphere_monomial(&m, &mult)?;
        if v.is_zero() {
            return Err(ModuleError::RelationFailed(format!("sphere monomial {:?} vanishes", mult)));
        }
        basis.push(Matrix::from_cols(1, &[v.coords.clone()]));
        labels.push(vec![Label::Sphere(mult)]);
    }
    m.change_basis(&basis, labels)
}

/// `f_{e_{i+1}} v = f_{e_i} f_{a_{i+1}} v - q^{-1} f_{a_{i+1}} f_{e_i} v`, with `f_{e_1} = f_{a_1}`.
pub fn apply_f_eps(m: &WeightModule, i: usize, v: &WVec) -> Result<WVec, ModuleError> {
    if i == 0 {
        return m.apply_f(0, v);
    }
    let a = apply_f_eps(m, i - 1, &m.apply_f(i, v)?)?;
    let b = m.apply_f(i, &apply_f_eps(m, i - 1, v)?)?;
    let qi = m.field.q_pow(Q::from_integer(-1))?;
    Ok(a.add(&b.scale(&qi.neg())))
}

/// `e_{e_{i+1}} v = e_{a_{i+1}} e_{e_i} v - q e_{e_i} e_{a_{i+1}} v`, with `e_{e_1} = e_{a_1}`.
pub fn apply_e_eps(m: &WeightModule, i: usize, v: &WVec) -> Result<WVec, ModuleError> {
    if i == 0 {
        return m.apply_e(0, v);
    }
    let a = m.apply_e(i, &apply_e_eps(m, i - 1, v)?)?;
    let b = apply_e_eps(m, i - 1, &m.apply_e(i, v)?)?;
    let q1 = m.field.q_pow(Q::from_integer(1))?;
    Ok(a.add(&b.scale(&q1.neg())))
}

/// `f_{e1}^{m1} ... f_{en}^{mn} 1` in the current basis.
pub fn sphere_monomial(m: &WeightModule, mult: &[u32]) -> Result<WVec, ModuleError> {
    let mut v = m.top_vec();
    for i in (0..mult.len()).rev() {
        for _ in 0..mult[i] {
            v = apply_f_eps(m, i, &v)?;
        }
    }
    Ok(v)
}

/// Tensor product `A (x) B` with `e -> e (x) K + 1 (x) e`, `f -> f (x) 1 + K^{-1} (x) f`,
/// stored at height `depth` (or on the grading of the incomplete factor).
pub fn build_tensor(a: &WeightModule, b: &WeightModule, depth: Option<usize>) -> Result<WeightModule, ModuleError> {
    if !Arc::ptr_eq(&a.rs, &b.rs) && a.rs.name() != b.rs.name() {
        return Err(ModuleError::Incompatible("different root systems".into()));
    }
    if a.field.m() != b.field.m() || a.field.extension() != b.field.extension() {
        return Err(ModuleError::Incompatible(
            "factors live in different scalar fields; build both in one field".into(),
        ));
    }
    let rs = a.rs.clone();
    let n = rs.rank();
    let trunc = match (a.is_complete(), b.is_complete()) {
        (true, true) => Truncation::complete(n),
        (true, false) | (false, true) => {
            let inner = if a.is_complete() { &b.trunc } else { &a.trunc };
            let d = depth.unwrap_or(inner.depth.unwrap());
            if d > inner.depth.unwrap() {
                return Err(ModuleError::DepthExceeded { beta: vec![], depth: inner.depth.unwrap() });
            }
            Truncation { grade: inner.grade.clone(), depth: Some(d) }
        }
        (false, false) => {
            if a.trunc.grade != b.trunc.grade {
                return Err(ModuleError::Incompatible("truncations use different gradings".into()));
            }
            let d = depth.unwrap_or(a.trunc.depth.unwrap().min(b.trunc.depth.unwrap()));
            if d > a.trunc.depth.unwrap().min(b.trunc.depth.unwrap()) {
                return Err(ModuleError::DepthExceeded { beta: vec![], depth: d });
            }
            Truncation { grade: a.trunc.grade.clone(), depth: Some(d) }
        }
    };
    let top = a.top.add(&b.top)?;
    let chars: Vec<Scalar> = a.chars.iter().zip(&b.chars).map(|(x, y)| x.mul(y)).collect();

    // basis of each product weight space
    let mut spaces: std::collections::BTreeMap<Vec<i64>, Vec<(usize, usize, usize, usize)>> = Default::default();
    for wa in 0..a.num_weights() {
        for wb in 0..b.num_weights() {
            let beta = vadd(&a.weights[wa], &b.weights[wb]);
            if !trunc.contains(&beta) {
                continue;
            }
            let e = spaces.entry(beta).or_default();
            for ka in 0..a.dim(wa) {
                for kb in 0..b.dim(wb) {
                    e.push((wa, ka, wb, kb));
                }
            }
        }
    }
    let mut keys: Vec<Vec<i64>> = spaces.keys().cloned().collect();
    keys.sort_by(|x, y| {
        let hx: i64 = x.iter().sum();
        let hy: i64 = y.iter().sum();
        hx.cmp(&hy).then_with(|| y.cmp(x))
    });
    let index: HashMap<Vec<i64>, usize> = keys.iter().enumerate().map(|(k, b)| (b.clone(), k)).collect();
    let bases: Vec<Vec<(usize, usize, usize, usize)>> = keys.iter().map(|k| spaces[k].clone()).collect();
    let pos: Vec<HashMap<(usize, usize, usize, usize), usize>> =
        bases.iter().map(|bs| bs.iter().enumerate().map(|(k, p)| (*p, k)).collect()).collect();
    let labels: Vec<Vec<Label>> = bases
        .iter()
        .map(|bs| bs.iter().map(|&(wa, ka, wb, kb)| Label::Pair { v: (wa, ka), z: (wb, kb) }).collect())
        .collect();

    let mut e = vec![Vec::with_capacity(keys.len()); n];
    let mut f = vec![Vec::with_capacity(keys.len()); n];
    for (w, beta) in keys.iter().enumerate() {
        for i in 0..n {
            let ai = rs.simple_root(i);
            // e_i
            let down = vsub(beta, &ai);
            let di = index.get(&down).copied();
            let rows = di.map(|t| bases[t].len()).unwrap_or(0);
            let mut blk = Matrix::zeros(rows, bases[w].len());
            if let Some(t) = di {
                for (c, &(wa, ka, wb, kb)) in bases[w].iter().enumerate() {
                    let kz = b.char_simple(&b.weights[wb], i);
                    let ea = &a.e[i][wa];
                    if let Some(ta) = a.weight_index(&vsub(&a.weights[wa], &ai)) {
                        for r in 0..ea.rows() {
                            let x = ea.get(r, ka);
                            if !x.is_zero() {
                                let row = pos[t][&(ta, r, wb, kb)];
                                blk.add_at(row, c, &x.mul(&kz));
                            }
                        }
                    }
                    let eb = &b.e[i][wb];
                    if let Some(tb) = b.weight_index(&vsub(&b.weights[wb], &ai)) {
                        for r in 0..eb.rows() {
                            let x = eb.get(r, kb);
                            if !x.is_zero() {
                                let row = pos[t][&(wa, ka, tb, r)];
                                blk.add_at(row, c, x);
                            }
                        }
                    }
                }
            }
            e[i].push(blk);
            // f_i
            let up = vadd(beta, &ai);
            if !trunc.contains(&up) {
                f[i].push(None);
                continue;
            }
            let ui = index.get(&up).copied();
            let rows = ui.map(|t| bases[t].len()).unwrap_or(0);
            let mut blk = Matrix::zeros(rows, bases[w].len());
            if let Some(t) = ui {
                for (c, &(wa, ka, wb, kb)) in bases[w].iter().enumerate() {
                    let fa = a.f_block(i, wa)?;
                    if let Some(ta) = a.weight_index(&vadd(&a.weights[wa], &ai)) {
                        for r in 0..fa.rows() {
                            let x = fa.get(r, ka);
                            if !x.is_zero() {
                                let row = pos[t][&(ta, r, wb, kb)];
                                blk.add_at(row, c, x);
                            }
                        }
                    }
                    let kinv = a.char_simple(&a.weights[wa], i).inv()?;
                    let fb = b.f_block(i, wb)?;
                    if let Some(tb) = b.weight_index(&vadd(&b.weights[wb], &ai)) {
                        for r in 0..fb.rows() {
                            let x = fb.get(r, kb);
                            if !x.is_zero() {
                                let row = pos[t][&(wa, ka, tb, r)];
                                blk.add_at(row, c, &x.mul(&kinv));
                            }
                        }
                    }
                }
            }
            f[i].push(Some(blk));
        }
    }
    Ok(WeightModule {
        rs,
        field: a.field.clone(),
        top,
        chars,
        kind: Kind::Tensor,
        trunc,
        weights: keys,
        index,
        labels,
        e,
        f,
    })
}

/// Pair label decoded into factor weight and basis indices.
pub fn pair_of(l: &Label) -> ((usize, usize), (usize, usize)) {
    match l {
        Label::Pair { v, z } => (*v, *z),
        _ => panic!("not a tensor basis label"),
    }
}
