//! Acceptance run: one PASS/FAIL line per criterion.

use std::sync::Arc;
use std::time::{Duration, Instant};

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qextremal::cli::{report_text, Args};
use qextremal::forms::{contravariant_form, radical};
use qextremal::modules::{
    build_finite_dim, build_parabolic_verma, build_sphere_base, build_tensor, build_verma, sphere_field, Weight,
};
use qextremal::oracle::{submodule_span_evidence, tensor_decompose, wp_gram};
use qextremal::projector::{
    check_defining_identities, default_directions, ordering_disagreements, sl2_eigenvalues, weight_shift,
};
use qextremal::rootdata::{build_root_system, NormalOrdering, RootSystem, RootType, Q};
use qextremal::scalars::{Field, Scalar, Var};
use qextremal::twist::{
    direct_blocks, extremal_twist_direct, extremal_twist_projector, parabolic_twist_formula, reducibility_check,
    routes_agree, singular_space, sphere_basis_orthogonal, sphere_twist, twist_inverse_holds, Ideal, ParabolicData,
    TwistPair, Verdict,
};

struct Outcome {
    pass: bool,
    detail: String,
}

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

/// `[lambda + n]_q` for sl2 with `z = q^{lambda(h)}`, M = 1.
fn br(field: &Field, z: &Scalar, n: i64) -> Scalar {
    let q = field.var(Var::U);
    let x = z.mul(&q.pow(n));
    x.sub(&x.inv().unwrap()).div(&q.sub(&q.inv().unwrap())).unwrap()
}

/// Direct series value of `p(t)` on `f^l 1` of the sl2 Verma module.
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
            den = den.mul(&br(field, &xi.mul(&t), i));
        }
        let sign = if k % 2 == 0 { Scalar::one() } else { Scalar::from_int(-1) };
        total = total.add(&sign.mul(&t.pow(k)).mul(&q.pow(-k)).mul(&c).div(&den).unwrap());
    }
    total
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    let mut failures = Vec::new();
    for (t, m) in [(RootType::A, 1u32), (RootType::B, 2)] {
        let r = rs(t, 2);
        let field = Field::new(m);
        for labels in [[1, 0], [0, 1], [1, 1]] {
            let v = build_finite_dim(&r, &field, &labels).unwrap();
            for (k, o) in orderings(&r).iter().enumerate() {
                for c in check_defining_identities(&v, o).unwrap() {
                    checked += 1;
                    if !c.holds() {
                        failures.push(format!("{}{:?} ord {} at {:?}", r.name(), labels, k, c.beta));
                    }
                }
            }
        }
    }
    let el = start.elapsed();
    Outcome {
        pass: failures.is_empty() && checked > 0 && el < Duration::from_secs(120),
        detail: format!("{} dominant blocks checked, {} failures, {:.1?}", checked, failures.len(), el),
    }
}

fn criterion_2() -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    for (t, m, depth) in [(RootType::A, 1u32, 3usize), (RootType::B, 2, 2)] {
        let r = rs(t, 2);
        let field = Field::new(m);
        let verma = build_verma(&r, &field, Weight::generic(2), depth).unwrap();
        let lam = Weight { labels: vec![Q::from_integer(0); 2], symbolic: vec![Some(Var::z(2)), Some(Var::z(3))] };
        let shift = weight_shift(&r, &field, &lam).unwrap();
        let ords = orderings(&r);
        let bad = ordering_disagreements(&verma, &ords, &shift).unwrap();
        pass &= bad.is_empty() && ords.len() >= 2;
        details.push(format!("{}: {} orderings, {} weights, {} disagreements", r.name(), ords.len(), verma.num_weights(), bad.len()));
    }
    Outcome { pass, detail: details.join("; ") }
}

fn criterion_3() -> Outcome {
    let field = Field::new(1);
    let rows = sl2_eigenvalues(6).unwrap();
    let mut pass = rows.len() == 7;
    let mut pref = Vec::new();
    for r in &rows {
        pass &= r.value == sl2_series(&field, r.l);
        pass &= is_monomial(&r.prefactor);
        pref.push(match r.prefactor_exponents {
            Some((a, b)) => format!("l={}: q^{} z^{}", r.l, a, b),
            None => format!("l={}: {}", r.l, r.prefactor),
        });
    }
    Outcome {
        pass,
        detail: format!("series = engine and ratio law monomial for l <= 6; measured prefactors {}", pref.join(", ")),
    }
}

fn criterion_4() -> Outcome {
    let mut pass = true;
    let mut details = Vec::new();
    let dirs = |n| default_directions(n, 3);
    {
        let r = rs(RootType::A, 1);
        let field = Field::new(1);
        let v = build_finite_dim(&r, &field, &[1]).unwrap();
        let z = build_verma(&r, &field, Weight::generic(1), 2).unwrap();
        let pair = TwistPair::new(&v, &z, Ideal::for_module(&z)).unwrap();
        let d = extremal_twist_direct(&pair).unwrap();
        let p = extremal_twist_projector(&pair, &orderings(&r)[0], &dirs(1)).unwrap();
        let ok = twist_inverse_holds(&d, &p);
        pass &= ok;
        details.push(format!("sl2 V(1)xM: {}", ok));
    }
    {
        let r = rs(RootType::A, 2);
        let field = Field::new(1);
        let v = build_finite_dim(&r, &field, &[1, 0]).unwrap();
        let z = build_verma(&r, &field, Weight::generic(2), 2).unwrap();
        let pair = TwistPair::new(&v, &z, Ideal::for_module(&z)).unwrap();
        let d = extremal_twist_direct(&pair).unwrap();
        for (k, o) in orderings(&r).iter().enumerate() {
            let p = extremal_twist_projector(&pair, o, &dirs(2)).unwrap();
            let ok = twist_inverse_holds(&d, &p);
            pass &= ok;
            details.push(format!("A2 3xM ord {}: {}", k, ok));
        }
    }
    {
        let r = rs(RootType::B, 2);
        let field = Field::new(2);
        let v = build_finite_dim(&r, &field, &[1, 0]).unwrap();
        for levi in [vec![0usize], vec![1]] {
            let z = build_parabolic_verma(&r, &field, &levi, Weight::parabolic(&[0, 0], &levi), 3).unwrap();
            let pair = TwistPair::new(&v, &z, Ideal::for_module(&z)).unwrap();
            let d = extremal_twist_direct(&pair).unwrap();
            for (k, o) in orderings(&r).iter().enumerate() {
                let p = extremal_twist_projector(&pair, o, &dirs(2)).unwrap();
                let ok = twist_inverse_holds(&d, &p);
                pass &= ok;
                details.push(format!("B2 4xM_p(levi {:?}) ord {}: {}", levi, k, ok));
            }
        }
    }
    Outcome { pass, detail: details.join("; ") }
}

fn criterion_5() -> Outcome {
    let mut pass = true;
    let mut details = Vec::new();
    let r = rs(RootType::B, 2);
    let field = Field::new(2);
    for vl in [[1, 0], [0, 1]] {
        let v = build_finite_dim(&r, &field, &vl).unwrap();
        for levi in [0usize, 1] {
            for xi_k in [0i64, 1] {
                let mut xi = vec![0i64, 0];
                xi[levi] = xi_k;
                let z = build_parabolic_verma(&r, &field, &[levi], Weight::parabolic(&xi, &[levi]), 4).unwrap();
                let pair = TwistPair::new(&v, &z, Ideal::for_module(&z)).unwrap();
                let d = extremal_twist_direct(&pair).unwrap();
                let f = parabolic_twist_formula(&pair, &ParabolicData { levi: vec![levi], xi: xi.clone() }, &default_directions(2, 3))
                    .unwrap();
                let ok = routes_agree(&direct_blocks(&d), &f.blocks) && (xi_k != 0 || f.levi_factor_trivial);
                pass &= ok;
                details.push(format!("V{:?} levi {{{}}} xi {:?}: {}", vl, levi, xi, ok));
            }
        }
    }
    Outcome { pass, detail: details.join("; ") }
}

fn criterion_6() -> Outcome {
    let r = rs(RootType::A, 1);
    let field = Field::new(1);
    let z = field.var(Var::z(0));
    let v = build_finite_dim(&r, &field, &[1]).unwrap();
    let m = build_verma(&r, &field, Weight::generic(1), 3).unwrap();
    let pair = TwistPair::new(&v, &m, Ideal::for_module(&m)).unwrap();
    let res = reducibility_check(&pair).unwrap();
    let det = res.blocks.iter().find(|b| b.beta == vec![1]).unwrap().det.clone();

    // hand-built singular vector [l] v1 (x) 1 - z v0 (x) f1, normed with brute-force Grams
    let gv = wp_gram(&r, &field, &Weight::integral(&[1]), &[vec![0]]).unwrap().get(0, 0).clone();
    let gz = wp_gram(&r, &field, &Weight::generic(1), &[vec![0]]).unwrap().get(0, 0).clone();
    let l0 = br(&field, &z, 0);
    let oracle = l0.mul(&l0).mul(&gv).add(&z.mul(&z).mul(&gz));
    let normalized = oracle.div(&l0.mul(&l0)).unwrap();
    let matches_oracle = normalized == det;
    // locus: det / ([l+1]/[l]) is a unit
    let unit = det.div(&br(&field, &z, 1)).unwrap().mul(&l0);
    let locus = is_monomial(&unit);

    let qinv = field.q_pow(Q::from_integer(-1)).unwrap();
    let ms = m.specialize(&field, &[(Var::z(0), qinv)]).unwrap();
    let vz = build_tensor(&v, &ms, Some(3)).unwrap();
    let ev = submodule_span_evidence(&vz, 3).unwrap();
    let gap = ev.gaps().iter().any(|g| g.beta == vec![1]);
    let generic_full = submodule_span_evidence(&pair.vz, 3).unwrap().full();
    let degenerate = TwistPair::new(&v, &ms, Ideal::Trivial).and_then(|p| reducibility_check(&p)).unwrap();
    let not_cr = degenerate.verdict == Verdict::NotCompletelyReducible;
    Outcome {
        pass: matches_oracle && locus && gap && generic_full && not_cr,
        detail: format!(
            "det = {}; oracle match {}; det ~ [l+1]/[l] {}; gap at [l+1]=0 {}; generic coverage full {}; verdict at locus {}",
            det,
            matches_oracle,
            locus,
            gap,
            generic_full,
            degenerate.verdict.as_str()
        ),
    }
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let mut a = true;
    let mut b = true;
    let mut c = true;
    let mut d = true;
    let mut mirror = true;
    let mut failures_d = Vec::new();
    let mut n2_time = Duration::ZERO;
    for n in 1..=2usize {
        let t0 = Instant::now();
        a &= sphere_basis_orthogonal(n, 6).unwrap();
        let r = rs(RootType::B, n);
        let field = sphere_field();
        let mut labels: Vec<Vec<i64>> = vec![vec![]];
        for _ in 0..n {
            labels = labels.into_iter().flat_map(|l| (0..=2).map(move |k| [l.clone(), vec![k]].concat())).collect();
        }
        for ell in labels {
            let st = sphere_twist(n, &ell, 0, &default_directions(n, 3)).unwrap();
            b &= st.all_nonzero && st.dims_match;
            c &= st.verdict == Verdict::CompletelyReducible;
            if st.global_scalar.is_none() {
                d = false;
                failures_d.push(format!(
                    "n={} l={:?} ratios [{}]",
                    n,
                    ell,
                    st.ratios.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
                ));
            }
            // mirror: V (x) Z through the fallback parametrization
            let v = build_finite_dim(&r, &field, &ell).unwrap();
            let total: i64 = ell.iter().sum();
            let zs = build_sphere_base(&r, &field, 2 * total as usize + 1).unwrap();
            match TwistPair::new(&v, &zs, Ideal::Fallback).and_then(|p| reducibility_check(&p)) {
                Ok(res) => mirror &= res.verdict == st.verdict,
                Err(e) => {
                    mirror = false;
                    failures_d.push(format!("mirror n={} l={:?}: {}", n, ell, e));
                }
            }
        }
        if n == 2 {
            n2_time = t0.elapsed();
        }
    }
    let el = start.elapsed();
    let pass = a && b && c && d && mirror && n2_time < Duration::from_secs(600);
    Outcome {
        pass,
        detail: format!(
            "(a) orthogonal {}; (b) nonzero {}; (c) completely reducible {}; (d) one global scalar {}; mirror {}; n=2 {:.1?}, total {:.1?}{}",
            a,
            b,
            c,
            d,
            mirror,
            n2_time,
            el,
            if failures_d.is_empty() { String::new() } else { format!("\n      {}", failures_d.join("\n      ")) }
        ),
    }
}

fn criterion_8() -> Outcome {
    let r = rs(RootType::B, 2);
    let field = Field::new(2);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut pass = true;
    let mut details = Vec::new();
    for levi in [0usize, 1] {
        let free = 1 - levi;
        let z = build_parabolic_verma(&r, &field, &[levi], Weight::parabolic(&[0, 0], &[levi]), 5).unwrap();
        for _ in 0..3 {
            let value = loop {
                let a: i64 = rng.gen_range(2..=11);
                let b: i64 = rng.gen_range(1..=7);
                if num_integer::gcd(a, b) == 1 {
                    break BigRational::new(a.into(), b.into());
                }
            };
            let zs = z.specialize(&field, &[(Var::z(free), Scalar::from_rational(&value))]).unwrap();
            let form = contravariant_form(&zs).unwrap();
            let rad: usize = form.blocks.iter().map(|g| radical(g).len()).sum();
            pass &= rad == 0;
            details.push(format!("levi {{{}}} z{}={}: radical {}", levi, free + 1, value, rad));
        }
    }
    Outcome { pass, detail: details.join("; ") }
}

fn criterion_9() -> Outcome {
    let mut pass = true;
    let mut details = Vec::new();
    let cases: [(RootType, u32, [i64; 2], [i64; 2]); 5] = [
        (RootType::A, 1, [1, 0], [1, 0]),
        (RootType::A, 1, [1, 1], [1, 0]),
        (RootType::A, 1, [1, 1], [1, 1]),
        (RootType::B, 2, [1, 0], [0, 1]),
        (RootType::B, 2, [0, 1], [0, 1]),
    ];
    for (t, m, a, b) in cases {
        let r = rs(t, 2);
        let field = Field::new(m);
        let va = build_finite_dim(&r, &field, &a).unwrap();
        let vb = build_finite_dim(&r, &field, &b).unwrap();
        let vz = build_tensor(&va, &vb, None).unwrap();
        let dec = tensor_decompose(&r, &a, &b);
        let mut ok = true;
        let mut count = 0;
        for beta in vz.weights() {
            let e = singular_space(&vz, beta).unwrap().dim() as u64;
            count += e;
            ok &= e == dec.get(beta).copied().unwrap_or(0);
        }
        pass &= ok;
        details.push(format!("{}{:?}x{:?}: {} singular, {}", r.name(), a, b, count, ok));
    }
    Outcome { pass, detail: details.join("; ") }
}

fn criterion_10() -> Outcome {
    let jobs = [
        r#"{"type":"A","rank":1,"task":"reducibility","V":[1],"Z":{"kind":"verma"},"depth":3}"#,
        r#"{"type":"B","rank":2,"task":"twist","V":[1,0],"Z":{"kind":"parabolic","levi":[1],"xi":[0,1]},"depth":3}"#,
        r#"{"type":"B","rank":2,"task":"sphere","n":2,"ell":[1,1]}"#,
        r#"{"type":"A","rank":2,"task":"oracle","V":[1,1],"Z":[1,0]}"#,
    ];
    let mut pass = true;
    for j in jobs {
        let a = report_text(j, &Args::default()).unwrap();
        let b = report_text(j, &Args::default()).unwrap();
        pass &= a == b;
    }
    Outcome { pass, detail: format!("{} jobs rendered twice, byte-identical {}", jobs.len(), pass) }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("projector defining identities", criterion_1),
        ("ordering independence", criterion_2),
        ("sl2 eigenvalue law", criterion_3),
        ("twist-inverse theorem", criterion_4),
        ("parabolic closed form", criterion_5),
        ("sl2 reducibility boundary", criterion_6),
        ("sphere application", criterion_7),
        ("parabolic irreducibility", criterion_8),
        ("oracle consistency", criterion_9),
        ("determinism", criterion_10),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = f();
        if !out.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {} ({:.1?})\n      {}",
            k + 1,
            name,
            if out.pass { "PASS" } else { "FAIL" },
            t.elapsed(),
            out.detail
        );
    }
    println!("acceptance: {} passed, {} failed", criteria.len() - failed, failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
