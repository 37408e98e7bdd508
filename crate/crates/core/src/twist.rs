//! Singular vectors in tensor products, the parametrization by `V^+_Z`,
//! extremal twists by the direct and projector routes, the parabolic closed
//! form, the sphere twist and complete-reducibility verdicts.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::forms::{canonical_form, contravariant_form, GradedForm};
use crate::linalg::Matrix;
use crate::modules::{
    build_finite_dim, build_sphere_base, build_tensor, pair_of, sphere_field, Gen, Kind, Label, ModuleError, WVec,
    Weight, WeightModule,
};
use crate::projector::{
    combine_shifts, regularize, weight_shift, ProjectorError, RegVerdict, RegularizationProbe, RootVectors,
};
use crate::rootdata::{build_root_system, NormalOrdering, RootSystem, RootType, Q};
use crate::scalars::{Exp, Field, Poly, Scalar, ScalarError, NVARS, VAR_NAMES};

#[derive(Debug, Error)]
pub enum TwistError {
    #[error(transparent)]
    Module(#[from] ModuleError),
    #[error(transparent)]
    Projector(#[from] ProjectorError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error("the second factor is stored to depth {have}; depth {required} is required")]
    Depth { required: usize, have: usize },
    #[error("vector at {0:?} lies outside the parametrizing subspace")]
    NotInImage(Vec<i64>),
    #[error("parametrization mismatch at {beta:?}: {reason}")]
    Mismatch { beta: Vec<i64>, reason: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
}

fn vsub(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Generators of the left ideal `I^+_Z` of the second factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ideal {
    /// Verma modules: nothing to impose.
    Trivial,
    /// `e_i^{m_i + 1}` for every `i` with `Some(m_i)`.
    Powers(Vec<Option<u32>>),
    /// Unknown generators: `V^+_Z` is taken to be the image of the singular vectors.
    Fallback,
}

impl Ideal {
    /// The ideal of a module from the catalog, or `Fallback`.
    pub fn for_module(m: &WeightModule) -> Ideal {
        let top = m.highest_weight();
        match m.kind() {
            Kind::Verma => Ideal::Trivial,
            Kind::Finite => match top.integral_labels() {
                Some(l) => Ideal::Powers(l.iter().map(|&x| Some(x as u32)).collect()),
                None => Ideal::Fallback,
            },
            Kind::Parabolic => Ideal::Powers(
                (0..m.rank())
                    .map(|i| match top.symbolic[i] {
                        None if top.labels[i].is_integer() && top.labels[i] >= Q::from_integer(0) => {
                            Some(top.labels[i].to_integer() as u32)
                        }
                        _ => None,
                    })
                    .collect(),
            ),
            _ => Ideal::Fallback,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Ideal::Trivial => "trivial".into(),
            Ideal::Powers(p) => {
                let g: Vec<String> =
                    p.iter().enumerate().filter_map(|(i, m)| m.map(|m| format!("e{}^{}", i + 1, m + 1))).collect();
                format!("generated by {}", g.join(", "))
            }
            Ideal::Fallback => "fallback parametrization".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SingularSpace {
    pub beta: Vec<i64>,
    /// Basis vectors as columns in `(V (x) Z)[beta]`.
    pub basis: Matrix,
}

impl SingularSpace {
    pub fn dim(&self) -> usize {
        self.basis.cols()
    }
}

/// Joint kernel of the `e_i` blocks on the weight space with key `beta`.
pub fn singular_space(vz: &WeightModule, beta: &[i64]) -> Result<SingularSpace, TwistError> {
    let d = vz.dim_at(beta)?;
    let Some(w) = vz.weight_index(beta) else {
        return Ok(SingularSpace { beta: beta.to_vec(), basis: Matrix::zeros(0, 0) });
    };
    let mut stacked = Matrix::zeros(0, d);
    for i in 0..vz.rank() {
        stacked = stacked.vstack(vz.e_block(i, w));
    }
    let ker = stacked.kernel();
    Ok(SingularSpace { beta: beta.to_vec(), basis: Matrix::from_cols(d, &ker) })
}

/// Matrix of `v (x) z -> v <1_Z, z>` from `(V (x) Z)[beta]` to `V[beta]`.
pub fn delta_bar_matrix(vz: &WeightModule, v: &WeightModule, beta: &[i64]) -> Result<Matrix, TwistError> {
    let dv = v.dim_at(beta)?;
    let Some(w) = vz.weight_index(beta) else { return Ok(Matrix::zeros(dv, 0)) };
    let labels = vz.labels(w);
    let mut m = Matrix::zeros(dv, labels.len());
    for (c, l) in labels.iter().enumerate() {
        let ((_, ka), (wb, kb)) = pair_of(l);
        if wb == 0 && kb == 0 {
            m.set(ka, c, Scalar::one());
        }
    }
    Ok(m)
}

/// `delta_bar` on a single vector.
pub fn delta_bar(vz: &WeightModule, v: &WeightModule, u: &WVec) -> Result<WVec, TwistError> {
    let m = delta_bar_matrix(vz, v, &u.beta)?;
    Ok(WVec { beta: u.beta.clone(), coords: m.mul_vec(&u.coords) })
}

/// Data attached to one weight key of the first factor.
#[derive(Clone, Debug)]
pub struct KeySpaces {
    pub beta: Vec<i64>,
    pub singular: SingularSpace,
    pub delta_bar: Matrix,
    /// Basis of `V^+_Z[beta]` (columns in `V[beta]`).
    pub plus: Matrix,
    /// Basis of `+V_Z[beta]`.
    pub dual: Matrix,
    /// `<plus_i, dual_j>`.
    pub pairing: Matrix,
    /// `delta(plus_j)` as columns in `(V (x) Z)[beta]`.
    pub lifts: Matrix,
    pub dual_is_plus: bool,
}

/// A pair `(V, Z)` with everything needed to compare twist routes.
pub struct TwistPair<'a> {
    pub v: &'a WeightModule,
    pub z: &'a WeightModule,
    pub ideal: Ideal,
    pub vz: WeightModule,
    pub form_v: GradedForm,
    pub form_z: GradedForm,
    pub form_vz: GradedForm,
    pub spaces: Vec<KeySpaces>,
}

fn ideal_kernel(v: &WeightModule, ideal: &Ideal, beta: &[i64]) -> Result<Matrix, TwistError> {
    let d = v.dim_at(beta)?;
    match ideal {
        Ideal::Trivial | Ideal::Fallback => Ok(Matrix::identity(d)),
        Ideal::Powers(p) => {
            let mut stacked = Matrix::zeros(0, d);
            for (i, m) in p.iter().enumerate() {
                if let Some(m) = m {
                    let word = vec![Gen::E(i); *m as usize + 1];
                    let (_, b) = v.word_block(&word, beta)?;
                    stacked = stacked.vstack(&b);
                }
            }
            Ok(Matrix::from_cols(d, &stacked.kernel()))
        }
    }
}

/// Basis of the column span.
fn column_basis(m: &Matrix) -> Matrix {
    let (_, piv) = m.rref();
    m.select_cols(&piv)
}

impl<'a> TwistPair<'a> {
    pub fn new(v: &'a WeightModule, z: &'a WeightModule, ideal: Ideal) -> Result<Self, TwistError> {
        let mut cands: Vec<(Vec<i64>, Matrix)> = Vec::new();
        for w in 0..v.num_weights() {
            let beta = v.weights()[w].clone();
            let k = ideal_kernel(v, &ideal, &beta)?;
            if k.cols() > 0 {
                cands.push((beta, k));
            }
        }
        let depth = match (v.is_complete(), z.is_complete()) {
            (true, true) => None,
            (true, false) => {
                let req = cands.iter().map(|(b, _)| z.truncation().grade_of(b)).max().unwrap_or(0) as usize;
                let have = z.truncation().depth.unwrap();
                if req > have {
                    return Err(TwistError::Depth { required: req, have });
                }
                Some(req)
            }
            (false, true) => Some(cands.iter().map(|(b, _)| v.truncation().grade_of(b)).max().unwrap_or(0) as usize),
            (false, false) => return Err(TwistError::Unsupported("both factors are truncated".into())),
        };
        let vz = build_tensor(v, z, depth)?;
        let form_v = contravariant_form(v)?;
        let form_z = contravariant_form(z)?;
        let form_vz = canonical_form(&vz, &form_v, &form_z);
        let mut spaces = Vec::new();
        for (beta, cand) in cands {
            let singular = singular_space(&vz, &beta)?;
            let db = delta_bar_matrix(&vz, v, &beta)?;
            let img = db.mul(&singular.basis);
            if img.rank() != singular.dim() {
                return Err(TwistError::Mismatch { beta, reason: "delta_bar is not injective on singular vectors".into() });
            }
            let plus = if ideal == Ideal::Fallback {
                column_basis(&img)
            } else {
                let r = cand.rank();
                if img.rank() != r || cand.hstack(&img).rank() != r {
                    return Err(TwistError::Mismatch {
                        beta,
                        reason: format!("dim V+_Z = {} but {} singular vectors", r, img.rank()),
                    });
                }
                cand
            };
            if plus.cols() == 0 {
                continue;
            }
            let x = img.solve(&plus).ok_or_else(|| TwistError::NotInImage(beta.clone()))?;
            let lifts = singular.basis.mul(&x);
            let g = form_v.block(v.weight_index(&beta).unwrap());
            let p = plus.transpose().mul(g).mul(&plus);
            let (dual, dual_is_plus) = if !p.det().is_zero() {
                (plus.clone(), true)
            } else {
                let (_, piv) = plus.transpose().rref();
                let d = plus.rows();
                let units: Vec<Vec<Scalar>> = piv
                    .iter()
                    .map(|&r| (0..d).map(|k| if k == r { Scalar::one() } else { Scalar::zero() }).collect())
                    .collect();
                (g.inverse()?.mul(&Matrix::from_cols(d, &units)), false)
            };
            let pairing = plus.transpose().mul(g).mul(&dual);
            spaces.push(KeySpaces { beta, singular, delta_bar: db, plus, dual, pairing, lifts, dual_is_plus });
        }
        Ok(TwistPair { v, z, ideal, vz, form_v, form_z, form_vz, spaces })
    }

    pub fn key(&self, beta: &[i64]) -> Option<&KeySpaces> {
        self.spaces.iter().find(|k| k.beta == beta)
    }

    /// `delta(x)` for `x` in `V^+_Z[beta]`.
    pub fn delta(&self, x: &WVec) -> Result<WVec, TwistError> {
        let ks = self.key(&x.beta).ok_or_else(|| TwistError::NotInImage(x.beta.clone()))?;
        let img = ks.delta_bar.mul(&ks.singular.basis);
        let rhs = Matrix::from_cols(x.coords.len(), &[x.coords.clone()]);
        let c = img.solve(&rhs).ok_or_else(|| TwistError::NotInImage(x.beta.clone()))?;
        Ok(WVec { beta: x.beta.clone(), coords: ks.singular.basis.mul(&c).col(0) })
    }

    /// Total number of singular vectors over the relevant keys.
    pub fn singular_count(&self) -> usize {
        self.spaces.iter().map(|k| k.singular.dim()).sum()
    }

    fn vz_gram(&self, beta: &[i64]) -> &Matrix {
        self.form_vz.block(self.vz.weight_index(beta).unwrap())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    CompletelyReducible,
    NotCompletelyReducible,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::CompletelyReducible => "completely_reducible",
            Verdict::NotCompletelyReducible => "not_completely_reducible",
        }
    }
}

#[derive(Clone, Debug)]
pub struct TwistBlock {
    pub beta: Vec<i64>,
    /// Pulled-back canonical Gram on the `V^+_Z` basis.
    pub gram: Matrix,
    pub det: Scalar,
    /// Matrix of `theta` from `V^+_Z` coordinates to `+V_Z` coordinates.
    pub theta: Option<Matrix>,
}

#[derive(Clone, Debug)]
pub struct TwistResult {
    pub route: &'static str,
    pub blocks: Vec<TwistBlock>,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

fn verdict_of(blocks: &[TwistBlock]) -> Verdict {
    if blocks.iter().all(|b| !b.det.is_zero()) {
        Verdict::CompletelyReducible
    } else {
        Verdict::NotCompletelyReducible
    }
}

fn pair_notes(pair: &TwistPair) -> Vec<String> {
    let mut notes = Vec::new();
    if pair.ideal == Ideal::Fallback {
        notes.push("fallback parametrization".to_string());
    }
    for k in &pair.spaces {
        if !k.dual_is_plus {
            notes.push(format!("form degenerate on V+_Z at {:?}; +V_Z chosen as a dual complement", k.beta));
        }
    }
    notes
}

/// `theta` as the pullback of the canonical form through `delta`.
pub fn extremal_twist_direct(pair: &TwistPair) -> Result<TwistResult, TwistError> {
    let mut blocks = Vec::new();
    for ks in &pair.spaces {
        let g = pair.vz_gram(&ks.beta);
        let gram = ks.lifts.transpose().mul(g).mul(&ks.lifts);
        let det = gram.det();
        let theta = match ks.pairing.inverse() {
            Ok(pi) => Some(pi.mul(&gram)),
            Err(_) => None,
        };
        blocks.push(TwistBlock { beta: ks.beta.clone(), gram, det, theta });
    }
    let verdict = verdict_of(&blocks);
    Ok(TwistResult { route: "direct", blocks, verdict, notes: pair_notes(pair) })
}

/// Restricted canonical form on the singular vectors, weight by weight.
pub fn reducibility_check(pair: &TwistPair) -> Result<TwistResult, TwistError> {
    let mut r = extremal_twist_direct(pair)?;
    r.route = "restricted_canonical_form";
    Ok(r)
}

/// How a projector value was obtained.
#[derive(Clone, Debug)]
pub struct ProbeRecord {
    pub beta: Vec<i64>,
    pub side: &'static str,
    /// `None` when the value was regular without a shift parameter.
    pub probe: Option<RegularizationProbe>,
}

impl ProbeRecord {
    pub fn verdict(&self) -> &'static str {
        match &self.probe {
            None => "regular",
            Some(p) => p.verdict.as_str(),
        }
    }
}

/// Evaluates a shift-dependent recipe at the base point, regularizing along
/// `directions` if a bracket vanishes there.
pub fn evaluate_regularized<F>(
    field: &Field,
    rs: &RootSystem,
    directions: &[Vec<i64>],
    recipe: F,
) -> Result<(Option<Matrix>, Option<RegularizationProbe>), TwistError>
where
    F: Fn(&[Scalar]) -> Result<Matrix, ProjectorError>,
{
    let ones = vec![Scalar::one(); rs.rank()];
    match recipe(&ones) {
        Ok(m) => Ok((Some(m), None)),
        Err(ProjectorError::Pole { .. }) => {
            let probe = regularize(field, rs, directions, recipe)?;
            let v = if probe.verdict == RegVerdict::WellDefined { probe.value.clone() } else { None };
            Ok((v, Some(probe)))
        }
        Err(e) => Err(e.into()),
    }
}

#[derive(Clone, Debug)]
pub struct ProjectorBlock {
    pub beta: Vec<i64>,
    /// `theta_bar` from `+V_Z` coordinates to `V^+_Z` coordinates.
    pub theta_bar: Option<Matrix>,
    /// Its inverse, the twist by this route.
    pub theta: Option<Matrix>,
    /// `delta(p_g(zeta) w) = p_g(w (x) 1_Z)` checked on this key.
    pub cocycle: bool,
}

#[derive(Clone, Debug)]
pub struct ProjectorTwist {
    pub blocks: Vec<ProjectorBlock>,
    pub probes: Vec<ProbeRecord>,
    pub available: bool,
    pub cocycle_holds: bool,
}

/// Columns `w_j (x) 1_Z` in `(V (x) Z)[beta]`.
fn tensor_with_top(pair: &TwistPair, beta: &[i64], w: &Matrix) -> Matrix {
    let idx = pair.vz.weight_index(beta).unwrap();
    let labels = pair.vz.labels(idx);
    let mut x = Matrix::zeros(labels.len(), w.cols());
    for (c, l) in labels.iter().enumerate() {
        let ((_, ka), (wb, kb)) = pair_of(l);
        if wb == 0 && kb == 0 {
            for j in 0..w.cols() {
                x.set(c, j, w.get(ka, j).clone());
            }
        }
    }
    x
}

/// `theta_bar = delta_bar . p_g( . (x) 1_Z)` on `+V_Z`, with the cocycle
/// identity `p_g(w (x) 1_Z) = delta(p_g(zeta) w)` checked on every key.
pub fn extremal_twist_projector(
    pair: &TwistPair,
    ord: &NormalOrdering,
    directions: &[Vec<i64>],
) -> Result<ProjectorTwist, TwistError> {
    let rs = pair.v.root_system().clone();
    let field = pair.v.field().clone();
    let rv_v = RootVectors::new(pair.v, ord)?;
    let rv_vz = RootVectors::new(&pair.vz, ord)?;
    let zeta = pair.z.top_chars().to_vec();
    let mut blocks = Vec::new();
    let mut probes = Vec::new();
    let mut available = true;
    let mut cocycle_holds = true;
    for ks in &pair.spaces {
        let beta = ks.beta.clone();
        let (y, py) =
            evaluate_regularized(&field, &rs, directions, |d| rv_v.apply_shifted(&combine_shifts(&zeta, d), &beta, &ks.dual))?;
        probes.push(ProbeRecord { beta: beta.clone(), side: "V", probe: py });
        let x = tensor_with_top(pair, &beta, &ks.dual);
        let (u, pu) = evaluate_regularized(&field, &rs, directions, |d| rv_vz.apply_shifted(d, &beta, &x))?;
        probes.push(ProbeRecord { beta: beta.clone(), side: "VZ", probe: pu });
        let (Some(y), Some(u)) = (y, u) else {
            available = false;
            blocks.push(ProjectorBlock { beta, theta_bar: None, theta: None, cocycle: false });
            continue;
        };
        let w = pair.vz.weight_index(&beta).unwrap();
        let singular = (0..pair.vz.rank()).all(|i| pair.vz.e_block(i, w).mul(&u).is_zero());
        let cocycle = singular && ks.delta_bar.mul(&u) == y;
        cocycle_holds &= cocycle;
        let theta_bar = ks.plus.solve(&y);
        if theta_bar.is_none() {
            available = false;
        }
        let theta = theta_bar.as_ref().and_then(|t| t.inverse().ok());
        blocks.push(ProjectorBlock { beta, theta_bar, theta, cocycle });
    }
    Ok(ProjectorTwist { blocks, probes, available, cocycle_holds })
}

/// Parabolic data for the closed form.
#[derive(Clone, Debug)]
pub struct ParabolicData {
    pub levi: Vec<usize>,
    pub xi: Vec<i64>,
}

#[derive(Clone, Debug)]
pub struct ParabolicTwist {
    pub blocks: Vec<(Vec<i64>, Option<Matrix>)>,
    /// `p_k(xi)` acted as the identity on `+V_Z` at every key.
    pub levi_factor_trivial: bool,
    pub probes: Vec<ProbeRecord>,
    pub reducibility_suspected: bool,
}

/// `theta = p_k(xi)^{-1} p_{g/k}(zeta)^{-1}` on `V^+_Z`, using a normal
/// ordering with the Levi roots last.
pub fn parabolic_twist_formula(
    pair: &TwistPair,
    data: &ParabolicData,
    directions: &[Vec<i64>],
) -> Result<ParabolicTwist, TwistError> {
    let rs = pair.v.root_system().clone();
    let field = pair.v.field().clone();
    let ord = rs.levi_adapted_ordering(&data.levi).map_err(|e| TwistError::Unsupported(e.to_string()))?;
    let ld = rs.levi(&data.levi);
    let rv = RootVectors::new(pair.v, &ord)?;
    let roots_k = rv.ordered_subset(&ld.roots_k);
    let roots_gk = rv.ordered_subset(&ld.roots_gk);
    let zeta = pair.z.top_chars().to_vec();
    let xi = weight_shift(&rs, &field, &Weight::integral(&data.xi))?;
    let mut blocks = Vec::new();
    let mut probes = Vec::new();
    let mut trivial = true;
    let mut suspected = false;
    for ks in &pair.spaces {
        let beta = ks.beta.clone();
        let (k, pk) =
            evaluate_regularized(&field, &rs, directions, |d| rv.apply_partial(&roots_k, &combine_shifts(&xi, d), &beta, &ks.dual))?;
        probes.push(ProbeRecord { beta: beta.clone(), side: "p_k", probe: pk });
        let d = pair.v.dim_at(&beta)?;
        let a = rv.apply_partial(&roots_gk, &zeta, &beta, &Matrix::identity(d))?;
        let (Some(k), Ok(ainv)) = (k, a.inverse()) else {
            suspected = true;
            blocks.push((beta, None));
            continue;
        };
        trivial &= k == ks.dual;
        let rhs = ainv.mul(&ks.plus);
        match k.solve(&rhs) {
            Some(t) => blocks.push((beta, Some(t))),
            None => {
                suspected = true;
                blocks.push((beta, None));
            }
        }
    }
    Ok(ParabolicTwist { blocks, levi_factor_trivial: trivial, probes, reducibility_suspected: suspected })
}

/// Exact comparison of two twist block lists (missing blocks never agree).
pub fn routes_agree(a: &[(Vec<i64>, Option<Matrix>)], b: &[(Vec<i64>, Option<Matrix>)]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|((x, m), (y, n))| x == y && m.is_some() && m == n)
}

pub fn direct_blocks(r: &TwistResult) -> Vec<(Vec<i64>, Option<Matrix>)> {
    r.blocks.iter().map(|b| (b.beta.clone(), b.theta.clone())).collect()
}

pub fn projector_blocks(r: &ProjectorTwist) -> Vec<(Vec<i64>, Option<Matrix>)> {
    r.blocks.iter().map(|b| (b.beta.clone(), b.theta.clone())).collect()
}

/// `theta . theta_bar = id` and `theta_bar . theta = id` on every key.
pub fn twist_inverse_holds(direct: &TwistResult, proj: &ProjectorTwist) -> bool {
    direct.blocks.len() == proj.blocks.len()
        && direct.blocks.iter().zip(&proj.blocks).all(|(d, p)| match (&d.theta, &p.theta_bar) {
            (Some(t), Some(tb)) => t.mul(tb).is_identity() && tb.mul(t).is_identity(),
            _ => false,
        })
}

#[derive(Clone, Debug)]
pub struct SphereEntry {
    pub mult: Vec<u32>,
    pub beta: Vec<i64>,
    pub direct: Scalar,
    pub projector: Option<Scalar>,
    pub phi: Scalar,
}

#[derive(Clone, Debug)]
pub struct SphereTwist {
    pub n: usize,
    pub ell: Vec<i64>,
    pub entries: Vec<SphereEntry>,
    /// `Z^+_V` is spanned by the monomials with `m_i <= l_i`.
    pub dims_match: bool,
    pub all_nonzero: bool,
    pub routes_agree: bool,
    /// `direct / phi` when it is the same for every entry.
    pub global_scalar: Option<Scalar>,
    pub ratios: Vec<Scalar>,
    pub verdict: Verdict,
    pub probes: Vec<ProbeRecord>,
}

fn sphere_mult(beta: &[i64]) -> Vec<u32> {
    let n = beta.len();
    (0..n).map(|i| (beta[i] - if i + 1 < n { beta[i + 1] } else { 0 }) as u32).collect()
}

/// Root `e_i` (0-based) in simple-root coordinates of `B_n`.
fn eps(n: usize, i: usize) -> Vec<i64> {
    (0..n).map(|k| if k <= i { 1 } else { 0 }).collect()
}

/// The twist on `Z^+_V` for the sphere base module `Z` of `so(2n+1)` and the
/// finite module `V` with labels `ell`: direct route, projector route and the
/// product of the factors `phi_{xi, alpha, k}`.
pub fn sphere_twist(n: usize, ell: &[i64], ord_index: usize, directions: &[Vec<i64>]) -> Result<SphereTwist, TwistError> {
    if ell.len() != n || ell.iter().any(|&l| l < 0) {
        return Err(TwistError::Unsupported("labels must be nonnegative, one per simple root".into()));
    }
    let rs = std::sync::Arc::new(build_root_system(RootType::B, n).map_err(|e| TwistError::Unsupported(e.to_string()))?);
    let field = sphere_field();
    let total: i64 = ell.iter().sum();
    let zs = build_sphere_base(&rs, &field, total as usize + 1)?;
    let v = build_finite_dim(&rs, &field, ell)?;
    let ideal = Ideal::Powers(ell.iter().map(|&l| Some(l as u32)).collect());
    let pair = TwistPair::new(&zs, &v, ideal)?;

    let mut expected: Vec<Vec<u32>> = Vec::new();
    let mut idx = vec![0u32; n];
    loop {
        expected.push(idx.clone());
        let mut k = 0;
        while k < n {
            idx[k] += 1;
            if idx[k] as i64 <= ell[k] {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == n {
            break;
        }
    }
    let mut found: Vec<Vec<u32>> = pair.spaces.iter().map(|k| sphere_mult(&k.beta)).collect();
    expected.sort();
    found.sort();
    let dims_match = expected == found && pair.spaces.iter().all(|k| k.plus.cols() == 1);

    let direct = extremal_twist_direct(&pair)?;
    let words = rs.reduced_words_w0();
    let ord = rs.normal_ordering_from_word(&words[ord_index % words.len()]).map_err(|e| TwistError::Unsupported(e.to_string()))?;
    let proj = extremal_twist_projector(&pair, &ord, directions)?;

    let levi: Vec<usize> = (1..n).collect();
    let ld = rs.levi(&levi);
    let mut entries = Vec::new();
    for (b, pb) in direct.blocks.iter().zip(&proj.blocks) {
        let mult = sphere_mult(&b.beta);
        let d = b.theta.as_ref().map(|t| t.get(0, 0).clone()).unwrap_or_else(Scalar::zero);
        let p = pb.theta.as_ref().map(|t| t.get(0, 0).clone());
        let mut phi = Scalar::one();
        for &r in &ld.roots_gk {
            let alpha = rs.positive_roots()[r].clone();
            let l = sphere_root_length(n, &alpha, &mult);
            let base = rs.q_exp(&alpha);
            let nr = v.char_root(&vec![0; n], &alpha).mul(&field.q_pow(rs.rho_ip(&alpha))?);
            let top = nr.mul(&zs.char_root(&b.beta, &alpha));
            for k in 1..=l {
                let num = field.qbracket(Q::from_integer(k), Some(&top), base)?;
                let den = field.qbracket(Q::from_integer(-k), Some(&nr), base)?;
                phi = phi.mul(&num.div(&den)?);
            }
        }
        entries.push(SphereEntry { mult, beta: b.beta.clone(), direct: d, projector: p, phi });
    }
    let all_nonzero = entries.iter().all(|e| !e.direct.is_zero());
    let routes_agree = proj.available && entries.iter().all(|e| e.projector.as_ref() == Some(&e.direct));
    let ratios: Vec<Scalar> = entries.iter().map(|e| e.direct.div(&e.phi)).collect::<Result<_, _>>()?;
    let global_scalar = if !ratios.is_empty() && ratios.iter().all(|r| *r == ratios[0]) { Some(ratios[0].clone()) } else { None };
    Ok(SphereTwist {
        n,
        ell: ell.to_vec(),
        entries,
        dims_match,
        all_nonzero,
        routes_agree,
        global_scalar,
        ratios,
        verdict: direct.verdict,
        probes: proj.probes,
    })
}

/// Off-diagonal entries of the contravariant Gram matrix of the monomial
/// basis of the sphere base module vanish up to `depth`.
pub fn sphere_basis_orthogonal(n: usize, depth: usize) -> Result<bool, TwistError> {
    let rs = std::sync::Arc::new(build_root_system(RootType::B, n).map_err(|e| TwistError::Unsupported(e.to_string()))?);
    let zs = build_sphere_base(&rs, &sphere_field(), depth)?;
    let form = contravariant_form(&zs)?;
    Ok(form.blocks.iter().all(|g| {
        (0..g.rows()).all(|r| (0..g.cols()).all(|c| r == c || g.get(r, c).is_zero()))
    }))
}

/// `l_{xi, alpha}` on the monomial with multiplicities `mult`: `m_i` for
/// `alpha = e_i`, `min(m_i, m_j)` for `alpha = e_i + e_j`.
pub fn sphere_root_length(n: usize, alpha: &[i64], mult: &[u32]) -> i64 {
    for i in 0..n {
        if alpha == eps(n, i).as_slice() {
            return mult[i] as i64;
        }
        for j in 0..i {
            let s: Vec<i64> = eps(n, i).iter().zip(eps(n, j)).map(|(a, b)| a + b).collect();
            if alpha == s.as_slice() {
                return mult[i].min(mult[j]) as i64;
            }
        }
    }
    0
}

/// Readable factorization of a determinant: monomial unit, binomial and
/// small cyclotomic factors found by trial division, and the remainder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factored {
    pub unit: String,
    pub numerator: Vec<(String, u32)>,
    pub denominator: Vec<(String, u32)>,
}

impl Factored {
    pub fn render(&self) -> String {
        let f = |v: &[(String, u32)]| {
            v.iter().map(|(s, k)| if *k == 1 { format!("({})", s) } else { format!("({})^{}", s, k) }).collect::<Vec<_>>().join("*")
        };
        let num = f(&self.numerator);
        let den = f(&self.denominator);
        let mut out = self.unit.clone();
        if !num.is_empty() {
            out = format!("{}*{}", out, num);
        }
        if !den.is_empty() {
            out = format!("{}/({})", out, den);
        }
        out
    }
}

fn candidates(p: &Poly) -> Vec<Poly> {
    let vars = p.vars();
    let bound: i64 = if vars.len() <= 2 { 4 } else { 2 };
    let mut out = Vec::new();
    let mut exps: Vec<Vec<i64>> = vec![vec![]];
    for _ in &vars {
        let mut next = Vec::new();
        for e in &exps {
            for k in -bound..=bound {
                let mut e2 = e.clone();
                e2.push(k);
                next.push(e2);
            }
        }
        exps = next;
    }
    exps.sort_by_key(|e| e.iter().map(|x| x.abs()).sum::<i64>());
    for e in exps {
        // normalize: first nonzero exponent positive, primitive
        let Some(first) = e.iter().find(|&&x| x != 0) else { continue };
        if *first < 0 {
            continue;
        }
        let g = e.iter().fold(0i64, |a, &b| num_integer::gcd(a, b));
        let mut pos: Exp = [0; NVARS];
        let mut neg: Exp = [0; NVARS];
        for (k, &v) in vars.iter().enumerate() {
            if e[k] > 0 {
                pos[v] = e[k] as u32;
            } else if e[k] < 0 {
                neg[v] = (-e[k]) as u32;
            }
        }
        let a = Poly::monomial(pos, BigInt::one());
        let b = Poly::monomial(neg, BigInt::one());
        out.push(a.sub(&b));
        out.push(a.add(&b));
        if g == 1 {
            let a2 = a.mul(&a);
            let b2 = b.mul(&b);
            let ab = a.mul(&b);
            out.push(a2.add(&ab).add(&b2));
            out.push(a2.sub(&ab).add(&b2));
        }
    }
    out
}

fn factor_poly(p: &Poly) -> (Poly, Vec<(String, u32)>) {
    let mut rest = p.clone();
    let mut found = Vec::new();
    if rest.is_constant() || rest.is_zero() {
        return (rest, found);
    }
    let min = rest.min_exp();
    if min.iter().any(|&k| k > 0) {
        rest = rest.div_exact(&Poly::monomial(min, BigInt::one())).unwrap();
    }
    for c in candidates(&rest) {
        if rest.is_constant() {
            break;
        }
        let mut k = 0;
        while let Some(q) = rest.div_exact(&c) {
            rest = q;
            k += 1;
        }
        if k > 0 {
            found.push((c.to_string(), k));
        }
    }
    (rest, found)
}

fn monomial_string(e: &Exp) -> String {
    let parts: Vec<String> = (0..NVARS)
        .filter(|&i| e[i] > 0)
        .map(|i| if e[i] == 1 { VAR_NAMES[i].to_string() } else { format!("{}^{}", VAR_NAMES[i], e[i]) })
        .collect();
    parts.join("*")
}

/// Factorization of a base-field scalar; `None` for extension-valued input.
pub fn factor_scalar(s: &Scalar) -> Option<Factored> {
    let r = s.base_part()?;
    if !s.is_base() {
        return None;
    }
    let (nr, nf) = factor_poly(r.numer());
    let (dr, df) = factor_poly(r.denom());
    let mut unit_parts = Vec::new();
    let nmin = r.numer().min_exp();
    let dmin = r.denom().min_exp();
    let mut e_num: Exp = [0; NVARS];
    let mut e_den: Exp = [0; NVARS];
    for i in 0..NVARS {
        let d = nmin[i] as i64 - dmin[i] as i64;
        if d > 0 {
            e_num[i] = d as u32;
        } else {
            e_den[i] = (-d) as u32;
        }
    }
    let c = match (nr.as_constant(), dr.as_constant()) {
        (Some(a), Some(b)) => {
            let q = num_rational::BigRational::new(a, b);
            if q.is_one() {
                String::new()
            } else if q.denom().is_one() && q.numer().abs().is_one() {
                if q.numer().is_negative() { "-".into() } else { String::new() }
            } else {
                q.to_string()
            }
        }
        _ => String::new(),
    };
    let mut num_f = nf;
    let mut den_f = df;
    if !nr.is_constant() {
        num_f.push((nr.to_string(), 1));
    }
    if !dr.is_constant() {
        den_f.push((dr.to_string(), 1));
    }
    let ms = monomial_string(&e_num);
    let ds = monomial_string(&e_den);
    if !c.is_empty() && c != "-" {
        unit_parts.push(c.clone());
    }
    if !ms.is_empty() {
        unit_parts.push(ms);
    }
    let mut unit = if unit_parts.is_empty() { "1".to_string() } else { unit_parts.join("*") };
    if c == "-" {
        unit = format!("-{}", unit);
    }
    if !ds.is_empty() {
        unit = format!("{}/{}", unit, ds);
    }
    if r.is_zero() {
        unit = "0".into();
    }
    let _ = BigInt::zero();
    Some(Factored { unit, numerator: num_f, denominator: den_f })
}

/// `Label::Sphere` multiplicities of a key, for reporting.
pub fn sphere_label(m: &WeightModule, beta: &[i64]) -> Option<Vec<u32>> {
    let w = m.weight_index(beta)?;
    match m.labels(w).first() {
        Some(Label::Sphere(v)) => Some(v.clone()),
        _ => None,
    }
}

/// Convenience: the weight key shifted down by a simple root.
pub fn below(beta: &[i64], rs: &RootSystem, i: usize) -> Vec<i64> {
    vsub(beta, &rs.simple_root(i))
}
