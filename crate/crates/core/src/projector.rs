//! Root vectors on weight modules, the one-root factors of the shifted
//! extremal projector, their ordered products and exact regularization.
//!
//! Shifts enter multiplicatively. A shift `lambda` is described by its simple
//! characters `s_i = q^{(lambda, a_i)}`; the factor attached to a root `mu`
//! then uses `q_mu^{rho_mu + lambda_mu} = q^{(rho + lambda, mu)}`.
//! Regularization along an integral direction `eta` multiplies `s_i` by
//! `T^{M (eta, a_i)}`, i.e. `T = q^{t/M}`, and `t -> 0` is evaluation at `T = 1`.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::linalg::Matrix;
use crate::modules::{build_verma, ModuleError, WVec, Weight, WeightModule};
use crate::rootdata::{NormalOrdering, RootSystem, Q};
use crate::scalars::{limit_at_unity, Field, Scalar, ScalarError, Var};

#[derive(Debug, Error)]
pub enum ProjectorError {
    #[error(transparent)]
    Module(#[from] ModuleError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error("ordering/normalization mismatch for root {root}: {reason}")]
    Normalization { root: String, reason: String },
    #[error("pole in the factor of root {root}: bracket [{bracket}] vanishes")]
    Pole { root: String, bracket: String },
}

fn vadd(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn vsub(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// A weight-homogeneous operator given by blocks `M[beta] -> M[beta + shift]`
/// (weight keys as in [`WeightModule`], so `f_a` has shift `+a`).
#[derive(Clone, Debug, PartialEq)]
pub struct GradedOperator {
    pub shift: Vec<i64>,
    pub blocks: BTreeMap<Vec<i64>, Matrix>,
}

impl GradedOperator {
    pub fn new(shift: Vec<i64>) -> Self {
        GradedOperator { shift, blocks: BTreeMap::new() }
    }

    pub fn identity(m: &WeightModule) -> Self {
        let mut op = GradedOperator::new(vec![0; m.rank()]);
        for w in 0..m.num_weights() {
            op.blocks.insert(m.weights()[w].clone(), Matrix::identity(m.dim(w)));
        }
        op
    }

    pub fn block(&self, beta: &[i64]) -> Option<&Matrix> {
        self.blocks.get(beta)
    }

    /// `self . other` on every source weight where both blocks exist.
    pub fn compose(&self, other: &GradedOperator) -> GradedOperator {
        let mut out = GradedOperator::new(vadd(&self.shift, &other.shift));
        for (beta, b) in &other.blocks {
            let mid = vadd(beta, &other.shift);
            if let Some(a) = self.blocks.get(&mid) {
                out.blocks.insert(beta.clone(), a.mul(b));
            }
        }
        out
    }

    /// Sum on the common source weights.
    pub fn add(&self, other: &GradedOperator) -> GradedOperator {
        assert_eq!(self.shift, other.shift, "shift mismatch");
        let mut out = GradedOperator::new(self.shift.clone());
        for (beta, a) in &self.blocks {
            if let Some(b) = other.blocks.get(beta) {
                out.blocks.insert(beta.clone(), a.add(b));
            }
        }
        out
    }

    pub fn scale(&self, s: &Scalar) -> GradedOperator {
        GradedOperator {
            shift: self.shift.clone(),
            blocks: self.blocks.iter().map(|(k, m)| (k.clone(), m.scale(s))).collect(),
        }
    }

    pub fn apply(&self, v: &WVec) -> Option<WVec> {
        self.blocks.get(&v.beta).map(|b| WVec { beta: vadd(&v.beta, &self.shift), coords: b.mul_vec(&v.coords) })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Side {
    E,
    F,
}

/// Root vectors `e_mu`, `f_mu` along a normal ordering, evaluated lazily on a
/// module, together with the constants `a_mu` of
/// `[e_mu, f_mu] = a_mu (q^{h_mu} - q^{-h_mu}) / (q_mu - q_mu^{-1})`.
pub struct RootVectors<'a> {
    m: &'a WeightModule,
    ord: NormalOrdering,
    /// For a composite root: `(alpha, beta, q^{(alpha, beta)})` with
    /// `alpha < mu < beta` the innermost split in the ordering.
    split: Vec<Option<(usize, usize, Scalar)>>,
    a: Vec<Scalar>,
    cache: RefCell<HashMap<(Side, usize, Vec<i64>), Matrix>>,
}

type NormKey = (String, Vec<usize>, u32);

fn norm_cache() -> &'static Mutex<HashMap<NormKey, Vec<Scalar>>> {
    static C: OnceLock<Mutex<HashMap<NormKey, Vec<Scalar>>>> = OnceLock::new();
    C.get_or_init(|| Mutex::new(HashMap::new()))
}

fn splits(rs: &RootSystem, field: &Field, ord: &NormalOrdering) -> Result<Vec<Option<(usize, usize, Scalar)>>, ProjectorError> {
    let n = rs.num_positive();
    let pos: Vec<usize> = (0..n).map(|r| ord.position(r).expect("ordering lists every root")).collect();
    let mut out = vec![None; n];
    for g in 0..n {
        let gamma = &rs.positive_roots()[g];
        if rs.simple_index(gamma).is_some() {
            continue;
        }
        let mut best: Option<(usize, usize)> = None;
        for a in 0..n {
            let rest = vsub(gamma, &rs.positive_roots()[a]);
            let Some(b) = rs.root_index(&rest) else { continue };
            if !(pos[a] < pos[g] && pos[g] < pos[b]) {
                continue;
            }
            if best.map_or(true, |(x, y)| pos[b] - pos[a] < pos[y] - pos[x]) {
                best = Some((a, b));
            }
        }
        let (a, b) = best.ok_or_else(|| ProjectorError::Normalization {
            root: rs.root_name(gamma),
            reason: "no split compatible with the ordering".into(),
        })?;
        let c = field.q_pow(rs.ip(&rs.positive_roots()[a], &rs.positive_roots()[b]))?;
        out[g] = Some((a, b, c));
    }
    Ok(out)
}

/// Depth of the generic Verma module used to extract and check `a_mu`.
fn norm_depth(rs: &RootSystem) -> usize {
    let top: i64 = rs.positive_roots().last().map(|r| r.iter().sum()).unwrap_or(1);
    if rs.rank() <= 2 {
        top as usize + 1
    } else {
        top as usize
    }
}

/// Computes `a_mu` on a generic Verma module and checks the commutator on
/// every weight where it can be evaluated.
fn normalizations(rs: &Arc<RootSystem>, m: u32, ord: &NormalOrdering) -> Result<Vec<Scalar>, ProjectorError> {
    let key = (rs.name(), ord.roots.clone(), m);
    if let Some(v) = norm_cache().lock().unwrap().get(&key) {
        return Ok(v.clone());
    }
    let field = Field::new(m);
    let depth = norm_depth(rs);
    let verma = build_verma(rs, &field, Weight::generic(rs.rank()), depth)?;
    let n = rs.num_positive();
    let ones = vec![Scalar::one(); n];
    let rv = RootVectors { m: &verma, ord: ord.clone(), split: splits(rs, &field, ord)?, a: ones, cache: RefCell::new(HashMap::new()) };
    let zero = vec![0i64; rs.rank()];
    let mut a = Vec::with_capacity(n);
    for r in 0..n {
        let mu = rs.positive_roots()[r].clone();
        let name = rs.root_name(&mu);
        let ef = rv.e_block(r, &mu)?.mul(&rv.f_block(r, &zero)?);
        let br = verma.bracket(&zero, &mu, 0)?;
        let ar = ef.get(0, 0).div(&br)?;
        if ar.is_zero() {
            return Err(ProjectorError::Normalization { root: name, reason: "a_mu vanishes".into() });
        }
        let h: i64 = mu.iter().sum();
        for w in 0..verma.num_weights() {
            let beta = verma.weights()[w].clone();
            if beta.iter().sum::<i64>() + h > depth as i64 {
                continue;
            }
            let up = rv.e_block(r, &vadd(&beta, &mu))?.mul(&rv.f_block(r, &beta)?);
            let down = rv.f_block(r, &vsub(&beta, &mu))?.mul(&rv.e_block(r, &beta)?);
            let want = Matrix::identity(verma.dim(w)).scale(&ar.mul(&verma.bracket(&beta, &mu, 0)?));
            if up.sub(&down) != want {
                return Err(ProjectorError::Normalization {
                    root: name,
                    reason: format!("[e_mu, f_mu] is not a multiple of [h_mu] at {:?}", beta),
                });
            }
        }
        a.push(ar);
    }
    norm_cache().lock().unwrap().insert(key, a.clone());
    Ok(a)
}

impl<'a> RootVectors<'a> {
    pub fn new(m: &'a WeightModule, ord: &NormalOrdering) -> Result<Self, ProjectorError> {
        let rs = m.root_system();
        let a = normalizations(rs, m.field().m(), ord)?;
        Ok(RootVectors { m, ord: ord.clone(), split: splits(rs, m.field(), ord)?, a, cache: RefCell::new(HashMap::new()) })
    }

    pub fn module(&self) -> &WeightModule {
        self.m
    }

    pub fn ordering(&self) -> &NormalOrdering {
        &self.ord
    }

    /// `a_mu` for the positive root with index `r`.
    pub fn normalization(&self, r: usize) -> &Scalar {
        &self.a[r]
    }

    /// The chosen split `(alpha, beta)` of a composite root.
    pub fn split(&self, r: usize) -> Option<(usize, usize)> {
        self.split[r].as_ref().map(|(a, b, _)| (*a, *b))
    }

    fn root(&self, r: usize) -> &[i64] {
        &self.m.root_system().positive_roots()[r]
    }

    /// Dimension at a key; 0 below the top, error beyond the stored range.
    fn dim(&self, beta: &[i64]) -> Result<usize, ModuleError> {
        if beta.iter().any(|&x| x < 0) {
            return Ok(0);
        }
        self.m.dim_at(beta)
    }

    /// Block of `e_mu` on `M[beta] -> M[beta - mu]`.
    pub fn e_block(&self, r: usize, beta: &[i64]) -> Result<Matrix, ProjectorError> {
        self.block(Side::E, r, beta)
    }

    /// Block of `f_mu` on `M[beta] -> M[beta + mu]`.
    pub fn f_block(&self, r: usize, beta: &[i64]) -> Result<Matrix, ProjectorError> {
        self.block(Side::F, r, beta)
    }

    fn block(&self, side: Side, r: usize, beta: &[i64]) -> Result<Matrix, ProjectorError> {
        let key = (side, r, beta.to_vec());
        if let Some(b) = self.cache.borrow().get(&key) {
            return Ok(b.clone());
        }
        let mu = self.root(r).to_vec();
        let target = match side {
            Side::E => vsub(beta, &mu),
            Side::F => vadd(beta, &mu),
        };
        let rows = self.dim(&target)?;
        let cols = self.dim(beta)?;
        let b = if rows == 0 || cols == 0 {
            Matrix::zeros(rows, cols)
        } else if let Some(i) = self.m.root_system().simple_index(&mu) {
            let w = self.m.weight_index(beta).expect("nonzero weight space is indexed");
            match side {
                Side::E => self.m.e_block(i, w).clone(),
                Side::F => self.m.f_block(i, w)?.clone(),
            }
        } else {
            let (a, b, c) = self.split[r].clone().expect("composite root has a split");
            let (ra, rb) = (self.root(a).to_vec(), self.root(b).to_vec());
            match side {
                // e_a e_b - c e_b e_a
                Side::E => {
                    let x = self.block(Side::E, a, &vsub(beta, &rb))?.mul(&self.block(Side::E, b, beta)?);
                    let y = self.block(Side::E, b, &vsub(beta, &ra))?.mul(&self.block(Side::E, a, beta)?);
                    x.sub(&y.scale(&c))
                }
                // f_b f_a - c^{-1} f_a f_b
                Side::F => {
                    let x = self.block(Side::F, b, &vadd(beta, &ra))?.mul(&self.block(Side::F, a, beta)?);
                    let y = self.block(Side::F, a, &vadd(beta, &rb))?.mul(&self.block(Side::F, b, beta)?);
                    x.sub(&y.scale(&c.inv()?))
                }
            }
        };
        self.cache.borrow_mut().insert(key, b.clone());
        Ok(b)
    }

    /// `e_mu` or `f_mu` as a graded operator on every stored weight where it is defined.
    pub fn operator(&self, r: usize, raising: bool) -> Result<GradedOperator, ProjectorError> {
        let mu = self.root(r).to_vec();
        let shift: Vec<i64> = if raising { mu.iter().map(|x| -x).collect() } else { mu.clone() };
        let mut op = GradedOperator::new(shift);
        for beta in self.m.weights() {
            let blk = if raising { self.e_block(r, beta) } else { self.f_block(r, beta) };
            match blk {
                Ok(b) => {
                    op.blocks.insert(beta.clone(), b);
                }
                Err(ProjectorError::Module(ModuleError::DepthExceeded { .. })) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(op)
    }

    /// `X_mu = q^{(rho + lambda, mu)}` from the simple characters of `lambda`.
    pub fn shift_char(&self, r: usize, shift: &[Scalar]) -> Result<Scalar, ProjectorError> {
        let rs = self.m.root_system();
        let mu = self.root(r);
        let mut x = self.m.field().q_pow(rs.rho_ip(mu))?;
        for (i, &c) in mu.iter().enumerate() {
            if c != 0 {
                x = x.mul(&shift[i].pow(c));
            }
        }
        Ok(x)
    }

    /// Block of `p_mu` with shift character `x = q_mu^t` on `M[beta]`:
    /// `sum_k f_mu^k e_mu^k (-1)^k q_mu^{k(t-1)} / (a_mu^k [k]! prod_i [h_mu + t + i])`,
    /// the brackets taken at the weight of `beta`.
    pub fn factor_block(&self, r: usize, x: &Scalar, beta: &[i64]) -> Result<Matrix, ProjectorError> {
        let d = self.dim(beta)?;
        self.apply_factor(r, x, beta, &Matrix::identity(d))
    }

    /// `p_mu` applied to the columns of `cols` (vectors in `M[beta]`).
    pub fn apply_factor(&self, r: usize, x: &Scalar, beta: &[i64], cols: &Matrix) -> Result<Matrix, ProjectorError> {
        let field = self.m.field();
        let rs = self.m.root_system();
        let mu = self.root(r).to_vec();
        let base = rs.q_exp(&mu);
        let qmu_inv = field.q_pow(-base)?;
        let mut acc = cols.clone();
        if cols.rows() == 0 || cols.cols() == 0 {
            return Ok(acc);
        }
        let chr = self.m.char_root(beta, &mu).mul(x);
        let mut ek = cols.clone();
        let mut cur = beta.to_vec();
        let mut coef = Scalar::one();
        for k in 1i64.. {
            let next = vsub(&cur, &mu);
            if next.iter().any(|&c| c < 0) {
                break;
            }
            ek = self.e_block(r, &cur)?.mul(&ek);
            cur = next;
            if ek.is_zero() {
                break;
            }
            let br = field.qbracket(Q::from_integer(k), Some(&chr), base)?;
            if br.is_zero() {
                return Err(ProjectorError::Pole {
                    root: rs.root_name(&mu),
                    bracket: format!("h_mu + t + {} at {:?}", k, beta),
                });
            }
            let qk = field.qint(k, base)?;
            let step = x.mul(&qmu_inv).neg().div(&self.a[r].mul(&qk).mul(&br))?;
            coef = coef.mul(&step);
            let mut fk = ek.clone();
            let mut c2 = cur.clone();
            for _ in 0..k {
                fk = self.f_block(r, &c2)?.mul(&fk);
                c2 = vadd(&c2, &mu);
            }
            acc = acc.add(&fk.scale(&coef));
        }
        Ok(acc)
    }

    /// Ordered product of the factors over `roots` (given in ordering order)
    /// on `M[beta]`, for the shift with simple characters `shift`.
    pub fn partial_product(&self, roots: &[usize], shift: &[Scalar], beta: &[i64]) -> Result<Matrix, ProjectorError> {
        let d = self.dim(beta)?;
        self.apply_partial(roots, shift, beta, &Matrix::identity(d))
    }

    /// The ordered product over `roots` applied to columns in `M[beta]`.
    pub fn apply_partial(&self, roots: &[usize], shift: &[Scalar], beta: &[i64], cols: &Matrix) -> Result<Matrix, ProjectorError> {
        let mut acc = cols.clone();
        for &r in roots.iter().rev() {
            let x = self.shift_char(r, shift)?;
            acc = self.apply_factor(r, &x, beta, &acc)?;
        }
        Ok(acc)
    }

    /// `p_g(lambda) = p_{mu^1}(rho_1 + lambda_1) ... p_{mu^N}(rho_N + lambda_N)` on `M[beta]`.
    pub fn shifted_block(&self, shift: &[Scalar], beta: &[i64]) -> Result<Matrix, ProjectorError> {
        let d = self.dim(beta)?;
        self.apply_shifted(shift, beta, &Matrix::identity(d))
    }

    pub fn apply_shifted(&self, shift: &[Scalar], beta: &[i64], cols: &Matrix) -> Result<Matrix, ProjectorError> {
        let roots = self.ord.roots.clone();
        self.apply_partial(&roots, shift, beta, cols)
    }

    /// Roots of `sub` in the order of this ordering.
    pub fn ordered_subset(&self, sub: &[usize]) -> Vec<usize> {
        self.ord.roots.iter().copied().filter(|r| sub.contains(r)).collect()
    }
}

/// Simple characters of the zero shift.
pub fn zero_shift(rank: usize) -> Vec<Scalar> {
    vec![Scalar::one(); rank]
}

/// Simple characters `q^{(lambda, a_i)}` of a (possibly symbolic) weight.
pub fn weight_shift(rs: &RootSystem, field: &Field, lambda: &Weight) -> Result<Vec<Scalar>, ProjectorError> {
    Ok(lambda.chars(rs, field)?)
}

/// Simple characters of `t * eta` for an integral direction `eta` (Dynkin labels).
pub fn direction_shift(rs: &RootSystem, field: &Field, eta: &[i64]) -> Result<Vec<Scalar>, ProjectorError> {
    let t = field.var(Var::T);
    (0..rs.rank())
        .map(|i| {
            let a = rs.simple_root(i);
            let pairing = Q::from_integer(eta[i]) * rs.q_exp(&a);
            let e = field.u_exponent(pairing)?;
            Ok(t.pow(e))
        })
        .collect()
}

/// Pointwise product of two shifts.
pub fn combine_shifts(a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    a.iter().zip(b).map(|(x, y)| x.mul(y)).collect()
}

/// Default probe directions: `rho` and two fixed pseudo-random regular
/// dominant weights.
pub fn default_directions(rank: usize, count: usize) -> Vec<Vec<i64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0f_7e57);
    let mut out = vec![vec![1i64; rank]];
    while out.len() < count.max(1) {
        let d: Vec<i64> = (0..rank).map(|_| rng.gen_range(1..=9)).collect();
        if !out.contains(&d) {
            out.push(d);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProbeOutcome {
    Regular(Matrix),
    /// Pole at `T = 1` of the given order.
    Pole(u32),
    /// A bracket vanishes identically along this direction.
    Singular(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RegVerdict {
    WellDefined,
    DirectionDependent,
    NoRegularization,
}

impl RegVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegVerdict::WellDefined => "well_defined",
            RegVerdict::DirectionDependent => "direction_dependent",
            RegVerdict::NoRegularization => "no_regularization",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RegularizationProbe {
    pub directions: Vec<Vec<i64>>,
    pub outcomes: Vec<ProbeOutcome>,
    pub verdict: RegVerdict,
    /// Common value when well defined.
    pub value: Option<Matrix>,
}

impl RegularizationProbe {
    pub fn max_pole_order(&self) -> u32 {
        self.outcomes.iter().map(|o| if let ProbeOutcome::Pole(k) = o { *k } else { 0 }).max().unwrap_or(0)
    }
}

/// Evaluates `recipe(direction shift)` along each direction and takes the
/// exact limit `T -> 1`. The recipe receives the characters of `t * eta` and
/// is expected to multiply them into its own base shift.
pub fn regularize<F>(field: &Field, rs: &RootSystem, directions: &[Vec<i64>], recipe: F) -> Result<RegularizationProbe, ProjectorError>
where
    F: Fn(&[Scalar]) -> Result<Matrix, ProjectorError>,
{
    let mut outcomes = Vec::with_capacity(directions.len());
    for eta in directions {
        let dir = direction_shift(rs, field, eta)?;
        let out = match recipe(&dir) {
            Ok(m) => match m.try_map(|s| limit_at_unity(s, Var::T)) {
                Ok(v) => ProbeOutcome::Regular(v),
                Err(ScalarError::Pole { order }) => ProbeOutcome::Pole(order),
                Err(e) => return Err(e.into()),
            },
            Err(ProjectorError::Pole { root, bracket }) => ProbeOutcome::Singular(format!("{}: [{}]", root, bracket)),
            Err(e) => return Err(e),
        };
        outcomes.push(out);
    }
    let regular: Vec<&Matrix> = outcomes.iter().filter_map(|o| if let ProbeOutcome::Regular(m) = o { Some(m) } else { None }).collect();
    let (verdict, value) = if regular.is_empty() {
        (RegVerdict::NoRegularization, None)
    } else if regular.len() == outcomes.len() && regular.iter().all(|m| *m == regular[0]) {
        (RegVerdict::WellDefined, Some(regular[0].clone()))
    } else {
        (RegVerdict::DirectionDependent, None)
    };
    Ok(RegularizationProbe { directions: directions.to_vec(), outcomes, verdict, value })
}

/// Keys `beta` whose weight `top - beta` is dominant.
pub fn dominant_keys(m: &WeightModule) -> Vec<Vec<i64>> {
    let rs = m.root_system();
    let top = m.highest_weight();
    m.weights()
        .iter()
        .filter(|beta| {
            (0..rs.rank()).all(|i| {
                let a = rs.simple_root(i);
                top.symbolic[i].is_none()
                    && top.ip_numeric(rs, &a) * Q::from_integer(2) / rs.ip(&a, &a) - rs.coroot_pairing(beta, &a)
                        >= Q::from_integer(0)
            })
        })
        .cloned()
        .collect()
}

#[derive(Clone, Debug)]
pub struct IdentityCheck {
    pub beta: Vec<i64>,
    pub idempotent: bool,
    pub killed_by_e: bool,
    pub kills_f: bool,
}

impl IdentityCheck {
    pub fn holds(&self) -> bool {
        self.idempotent && self.killed_by_e && self.kills_f
    }
}

/// `p^2 = p`, `e_i p = 0` and `p f_i = 0` for `p = p_g(0)` on every dominant weight.
pub fn check_defining_identities(m: &WeightModule, ord: &NormalOrdering) -> Result<Vec<IdentityCheck>, ProjectorError> {
    let rs = m.root_system().clone();
    let rv = RootVectors::new(m, ord)?;
    let zero = zero_shift(rs.rank());
    let mut out = Vec::new();
    for beta in dominant_keys(m) {
        let w = m.weight_index(&beta).unwrap();
        let p = rv.shifted_block(&zero, &beta)?;
        let idempotent = p.mul(&p) == p;
        let mut killed_by_e = true;
        let mut kills_f = true;
        for i in 0..rs.rank() {
            killed_by_e &= m.e_block(i, w).mul(&p).is_zero();
            let below: Vec<i64> = beta.iter().zip(rs.simple_root(i)).map(|(x, y)| x - y).collect();
            if let Some(s) = m.weight_index(&below) {
                kills_f &= p.mul(m.f_block(i, s)?).is_zero();
            }
        }
        out.push(IdentityCheck { beta, idempotent, killed_by_e, kills_f });
    }
    Ok(out)
}

/// Compares `p_g(shift)` blocks across normal orderings; returns the keys
/// where some ordering disagrees with the first.
pub fn ordering_disagreements(
    m: &WeightModule,
    ords: &[NormalOrdering],
    shift: &[Scalar],
) -> Result<Vec<Vec<i64>>, ProjectorError> {
    let rvs: Vec<RootVectors> = ords.iter().map(|o| RootVectors::new(m, o)).collect::<Result<_, _>>()?;
    let mut bad = Vec::new();
    for beta in m.weights() {
        let first = rvs[0].shifted_block(shift, beta)?;
        for rv in &rvs[1..] {
            if rv.shifted_block(shift, beta)? != first {
                bad.push(beta.clone());
                break;
            }
        }
    }
    Ok(bad)
}

#[derive(Clone, Debug)]
pub struct EigenRow {
    pub l: i64,
    /// `p(t)` on `f^l 1` of the sl2 Verma module, `T = q^t`.
    pub value: Scalar,
    /// `prod_k [t - k] / [t + xi(h) + k]` with `xi` the weight of `f^l 1`.
    pub law: Scalar,
    pub prefactor: Scalar,
    /// `(exponent of q, exponent of q^{lambda(h)})` when the prefactor is `+- q^a z^b`.
    pub prefactor_exponents: Option<(Q, i64)>,
}

/// Eigenvalues of `p(t)` on the symbolic sl2 Verma module for `l <= depth`.
pub fn sl2_eigenvalues(depth: usize) -> Result<Vec<EigenRow>, ProjectorError> {
    let rs = Arc::new(crate::rootdata::build_root_system(crate::rootdata::RootType::A, 1).map_err(|e| {
        ProjectorError::Module(ModuleError::Unsupported(e.to_string()))
    })?);
    let field = Field::new(1);
    let m = build_verma(&rs, &field, Weight::generic(1), depth)?;
    let ord = rs.normal_ordering_from_word(&[0]).map_err(|e| ProjectorError::Module(ModuleError::Unsupported(e.to_string())))?;
    let rv = RootVectors::new(&m, &ord)?;
    let t = field.var(Var::T);
    let z = field.var(Var::z(0));
    let mut rows = Vec::new();
    for l in 0..=depth as i64 {
        let value = rv.factor_block(0, &t, &[l])?.get(0, 0).clone();
        let xi = z.mul(&field.q_pow(Q::from_integer(-2 * l))?);
        let mut law = Scalar::one();
        for k in 1..=l {
            let num = field.qbracket(Q::from_integer(-k), Some(&t), Q::from_integer(1))?;
            let den = field.qbracket(Q::from_integer(k), Some(&t.mul(&xi)), Q::from_integer(1))?;
            law = law.mul(&num.div(&den)?);
        }
        let prefactor = value.div(&law)?;
        let prefactor_exponents = monomial_exponents(&prefactor);
        rows.push(EigenRow { l, value, law, prefactor, prefactor_exponents });
    }
    Ok(rows)
}

/// `(a, b)` with `s = +- q^a z1^b` (M = 1), if `s` has that shape.
fn monomial_exponents(s: &Scalar) -> Option<(Q, i64)> {
    let r = s.base_part()?;
    let (n, d) = (r.numer(), r.denom());
    if n.total_terms() != 1 || d.total_terms() != 1 {
        return None;
    }
    let (ne, _) = n.terms()[0].clone();
    let (de, _) = d.terms()[0].clone();
    let a = ne[0] as i64 - de[0] as i64;
    let b = ne[2] as i64 - de[2] as i64;
    Some((Q::from_integer(a), b))
}

#[cfg(test)]
mod tests;
