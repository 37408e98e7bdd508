use super::*;
use crate::forms::contravariant_form;
use crate::modules::{apply_e_eps, build_finite_dim, build_sphere_base, sphere_field};
use crate::rootdata::{build_root_system, RootType};

fn rs(t: RootType, n: usize) -> Arc<RootSystem> {
    Arc::new(build_root_system(t, n).unwrap())
}

fn orderings(r: &RootSystem) -> Vec<NormalOrdering> {
    r.reduced_words_w0().iter().map(|w| r.normal_ordering_from_word(w).unwrap()).collect()
}

fn is_monomial(s: &Scalar) -> bool {
    let nz: Vec<_> = s.coords().iter().filter(|c| !c.is_zero()).collect();
    nz.len() == 1 && nz[0].numer().total_terms() == 1 && nz[0].denom().total_terms() == 1
}

/// `[n]_q` twisted by `z = q^{lambda(h)}` for sl2, written out independently.
fn br(field: &Field, z: &Scalar, n: i64) -> Scalar {
    let q = field.var(Var::U);
    let x = z.mul(&q.pow(n));
    x.sub(&x.inv().unwrap()).div(&q.sub(&q.inv().unwrap())).unwrap()
}

fn brt(field: &Field, z: &Scalar, n: i64) -> Scalar {
    br(field, &z.mul(&field.var(Var::T)), n)
}

/// Series value of `p(t)` on `f^l 1` of the sl2 Verma module using only
/// `e f^l 1 = [l][lambda - l + 1] f^{l-1} 1`.
fn sl2_series(field: &Field, l: i64) -> Scalar {
    let z = field.var(Var::z(0));
    let q = field.var(Var::U);
    let t = field.var(Var::T);
    let xi = z.mul(&q.pow(-2 * l));
    let mut total = Scalar::one();
    for k in 1..=l {
        let mut c = Scalar::one();
        for j in 0..k {
            c = c.mul(&field.qint(l - j, Q::from_integer(1)).unwrap()).mul(&br(field, &z, -l + 1 + j));
        }
        let mut den = field.qfactorial(k, Q::from_integer(1)).unwrap();
        for i in 1..=k {
            den = den.mul(&brt(field, &xi, i));
        }
        let sign = if k % 2 == 0 { Scalar::one() } else { Scalar::from_int(-1) };
        let num = sign.mul(&t.pow(k)).mul(&q.pow(-k)).mul(&c);
        total = total.add(&num.div(&den).unwrap());
    }
    total
}

#[test]
fn simple_roots_have_unit_normalization() {
    let r = rs(RootType::A, 2);
    let field = Field::new(1);
    let m = build_verma(&r, &field, Weight::generic(2), 2).unwrap();
    for o in orderings(&r) {
        let rv = RootVectors::new(&m, &o).unwrap();
        for i in 0..2 {
            let k = r.root_index(&r.simple_root(i)).unwrap();
            assert!(rv.normalization(k).is_one());
        }
        let top = r.root_index(&[1, 1]).unwrap();
        let a = rv.normalization(top);
        assert!(!a.is_zero() && is_monomial(a), "a_mu = {}", a);
    }
}

#[test]
fn b2_normalizations_validate() {
    let r = rs(RootType::B, 2);
    let field = Field::new(2);
    let m = build_verma(&r, &field, Weight::generic(2), 2).unwrap();
    for o in orderings(&r) {
        let rv = RootVectors::new(&m, &o).unwrap();
        for k in 0..r.num_positive() {
            assert!(!rv.normalization(k).is_zero());
        }
    }
}

#[test]
fn b2_short_root_vector_matches_sphere_operator() {
    let r = rs(RootType::B, 2);
    let field = sphere_field();
    let z = build_sphere_base(&r, &field, 3).unwrap();
    let eps2 = r.root_index(&[1, 1]).unwrap();
    let q = field.q_pow(Q::from_integer(1)).unwrap();
    for o in orderings(&r) {
        let rv = RootVectors::new(&z, &o).unwrap();
        let Some((a, _)) = rv.split(eps2) else { panic!("e2 is composite") };
        if r.positive_roots()[a] != vec![1, 0] {
            continue;
        }
        // e_{e1} first: the sphere operator is -q times ours
        for w in 0..z.num_weights() {
            let beta = z.weights()[w].clone();
            let ours = rv.e_block(eps2, &beta).unwrap();
            let v = z.basis_vec(w, 0);
            let theirs = apply_e_eps(&z, 1, &v).unwrap();
            let scaled: Vec<Scalar> = ours.col(0).iter().map(|s| s.mul(&q).neg()).collect();
            assert_eq!(scaled, theirs.coords, "at {:?}", beta);
        }
    }
}

#[test]
fn projector_fixes_highest_vector() {
    let r = rs(RootType::A, 1);
    let field = Field::new(1);
    let m = build_verma(&r, &field, Weight::generic(1), 3).unwrap();
    let o = orderings(&r).remove(0);
    let rv = RootVectors::new(&m, &o).unwrap();
    let p = rv.factor_block(0, &field.var(Var::T), &[0]).unwrap();
    assert!(p.is_identity());
}

#[test]
fn sl2_eigenvalues_match_series_and_ratio_law() {
    let r = rs(RootType::A, 1);
    let field = Field::new(1);
    let m = build_verma(&r, &field, Weight::generic(1), 6).unwrap();
    let o = orderings(&r).remove(0);
    let rv = RootVectors::new(&m, &o).unwrap();
    let t = field.var(Var::T);
    let z = field.var(Var::z(0));
    let one = Scalar::one();
    for l in 0..=6i64 {
        let p = rv.factor_block(0, &t, &[l]).unwrap();
        let val = p.get(0, 0).clone();
        assert_eq!(val, sl2_series(&field, l), "series at l = {}", l);
        let xi = z.mul(&field.var(Var::U).pow(-2 * l));
        let mut law = Scalar::one();
        for k in 1..=l {
            law = law.mul(&brt(&field, &one, -k)).div(&brt(&field, &xi, k)).unwrap();
        }
        let pref = val.div(&law).unwrap();
        assert!(is_monomial(&pref), "prefactor at l = {} is {}", l, pref);
    }
}

#[test]
fn sl2_extremal_value_kills_lower_vectors() {
    let r = rs(RootType::A, 1);
    let field = Field::new(1);
    let m = build_verma(&r, &field, Weight::generic(1), 4).unwrap();
    let rv = RootVectors::new(&m, &orderings(&r)[0]).unwrap();
    let q = field.q_pow(Q::from_integer(1)).unwrap();
    for l in 1..=4 {
        assert!(rv.factor_block(0, &q, &[l]).unwrap().is_zero());
    }
}

fn dominant(r: &RootSystem, nu: &[i64], beta: &[i64]) -> bool {
    let xi: Vec<Q> = (0..r.rank())
        .map(|i| {
            let w = Weight::integral(nu).ip_numeric(r, &r.simple_root(i)) * Q::from_integer(2) / r.ip(&r.simple_root(i), &r.simple_root(i));
            w - r.coroot_pairing(beta, &r.simple_root(i))
        })
        .collect();
    xi.iter().all(|x| *x >= Q::from_integer(0))
}

#[test]
fn a2_defining_identities() {
    let r = rs(RootType::A, 2);
    let field = Field::new(1);
    let v = build_finite_dim(&r, &field, &[1, 1]).unwrap();
    let o = orderings(&r).remove(0);
    let rv = RootVectors::new(&v, &o).unwrap();
    let zero = zero_shift(2);
    for w in 0..v.num_weights() {
        let beta = v.weights()[w].clone();
        if !dominant(&r, &[1, 1], &beta) {
            continue;
        }
        let p = rv.shifted_block(&zero, &beta).unwrap();
        assert_eq!(p.mul(&p), p);
        for i in 0..2 {
            assert!(v.e_block(i, w).mul(&p).is_zero());
            let below: Vec<i64> = beta.iter().zip(r.simple_root(i)).map(|(x, y)| x - y).collect();
            if let Some(s) = v.weight_index(&below) {
                assert!(p.mul(v.f_block(i, s).unwrap()).is_zero());
            }
        }
    }
}

#[test]
fn b2_orderings_agree_for_symbolic_shift() {
    let r = rs(RootType::B, 2);
    let field = Field::new(2);
    let m = build_verma(&r, &field, Weight::generic(2), 2).unwrap();
    let lam = Weight { labels: vec![Q::from_integer(0); 2], symbolic: vec![Some(Var::z(2)), Some(Var::z(3))] };
    let shift = weight_shift(&r, &field, &lam).unwrap();
    let ords = orderings(&r);
    assert_eq!(ords.len(), 2);
    let rvs: Vec<_> = ords.iter().map(|o| RootVectors::new(&m, o).unwrap()).collect();
    for beta in m.weights() {
        let a = rvs[0].shifted_block(&shift, beta).unwrap();
        let b = rvs[1].shifted_block(&shift, beta).unwrap();
        assert_eq!(a, b, "at {:?}", beta);
    }
}

#[test]
fn projector_is_omega_self_adjoint() {
    let r = rs(RootType::A, 2);
    let field = Field::new(1);
    let v = build_finite_dim(&r, &field, &[1, 1]).unwrap();
    let form = contravariant_form(&v).unwrap();
    let rv = RootVectors::new(&v, &orderings(&r)[0]).unwrap();
    let lam = Weight::generic(2);
    let shift = weight_shift(&r, &field, &lam).unwrap();
    for w in 0..v.num_weights() {
        let p = rv.shifted_block(&shift, &v.weights()[w]).unwrap();
        let g = form.block(w);
        assert_eq!(g.mul(&p), p.transpose().mul(g));
    }
}

#[test]
fn nondominant_weights_are_not_killed() {
    let r = rs(RootType::A, 1);
    let field = Field::new(1);
    let dirs = default_directions(1, 3);
    for (nu, beta, killed) in [(2, 1, true), (2, 2, false), (3, 2, true), (3, 3, false)] {
        let v = build_finite_dim(&r, &field, &[nu]).unwrap();
        let rv = RootVectors::new(&v, &orderings(&r)[0]).unwrap();
        let probe = regularize(&field, &r, &dirs, |d| rv.shifted_block(d, &[beta])).unwrap();
        assert_eq!(probe.verdict, RegVerdict::WellDefined, "nu {} beta {}", nu, beta);
        assert_eq!(probe.value.unwrap().is_zero(), killed, "nu {} beta {}", nu, beta);
    }
}

#[test]
fn constructed_pole_is_reported() {
    let r = rs(RootType::A, 1);
    let field = Field::new(1);
    let v = build_finite_dim(&r, &field, &[2]).unwrap();
    let rv = RootVectors::new(&v, &orderings(&r)[0]).unwrap();
    let qm1 = field.q_pow(Q::from_integer(-1)).unwrap();
    let dirs = default_directions(1, 3);
    let probe = regularize(&field, &r, &dirs, |d| rv.factor_block(0, &qm1.mul(&d[0]), &[1])).unwrap();
    assert_eq!(probe.verdict, RegVerdict::NoRegularization);
    assert_eq!(probe.max_pole_order(), 1);
    assert!(matches!(rv.factor_block(0, &qm1, &[1]), Err(ProjectorError::Pole { .. })));
}

#[test]
fn integer_shifts_are_regular_on_finite_modules() {
    let r = rs(RootType::A, 1);
    let field = Field::new(1);
    let t = field.var(Var::T);
    for nu in 0..=4i64 {
        let v = build_finite_dim(&r, &field, &[nu]).unwrap();
        let rv = RootVectors::new(&v, &orderings(&r)[0]).unwrap();
        for rr in 1..=3i64 {
            let x = field.q_pow(Q::from_integer(rr)).unwrap().mul(&t);
            for beta in v.weights() {
                let p = rv.factor_block(0, &x, beta).unwrap();
                assert!(p.try_map(|s| limit_at_unity(s, Var::T)).is_ok(), "nu {} r {} beta {:?}", nu, rr, beta);
            }
        }
    }
}

#[test]
fn easy_case_has_no_vanishing_brackets() {
    let r = rs(RootType::A, 1);
    let field = Field::new(1);
    let v = build_finite_dim(&r, &field, &[3]).unwrap();
    let rv = RootVectors::new(&v, &orderings(&r)[0]).unwrap();
    for rr in 0..=4i64 {
        let x = field.q_pow(Q::from_integer(rr)).unwrap();
        for beta in v.weights() {
            let xi = 3 - 2 * beta[0];
            if xi + rr >= 0 {
                assert!(rv.factor_block(0, &x, beta).is_ok(), "r {} xi {}", rr, xi);
            }
        }
    }
}

#[test]
fn graded_operator_composition() {
    let r = rs(RootType::A, 2);
    let field = Field::new(1);
    let v = build_finite_dim(&r, &field, &[1, 0]).unwrap();
    let rv = RootVectors::new(&v, &orderings(&r)[0]).unwrap();
    let e1 = rv.operator(0, true).unwrap();
    let f1 = rv.operator(0, false).unwrap();
    let id = GradedOperator::identity(&v);
    assert_eq!(e1.compose(&id), e1);
    let ef = e1.compose(&f1);
    assert_eq!(ef.shift, vec![0, 0]);
    let top = v.top_vec();
    assert!(e1.apply(&top).unwrap().is_zero());
    let out = ef.apply(&top).unwrap();
    assert_eq!(out.coords, vec![Scalar::one()]);
}

#[test]
fn eigen_rows_report_monomial_prefactors() {
    let rows = sl2_eigenvalues(4).unwrap();
    assert!(rows.iter().all(|r| r.prefactor_exponents.is_some()));
    assert_eq!(rows[1].prefactor_exponents, Some((Q::from_integer(0), -1)));
    for r in &rows {
        assert_eq!(r.value, sl2_series(&Field::new(1), r.l));
    }
}

#[test]
fn identity_checks_on_b2() {
    let r = rs(RootType::B, 2);
    let field = Field::new(2);
    let v = build_finite_dim(&r, &field, &[1, 1]).unwrap();
    for o in orderings(&r) {
        let checks = check_defining_identities(&v, &o).unwrap();
        assert!(!checks.is_empty());
        assert!(checks.iter().all(|c| c.holds()));
    }
}
