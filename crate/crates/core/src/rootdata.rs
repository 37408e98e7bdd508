//! Root systems of classical type, reduced words of the longest Weyl element
//! and normal orderings of positive roots.
//!
//! Roots are stored by their coordinates in the basis of simple roots. The
//! ambient realization uses an orthonormal basis `e1, ..., en` (`e1..e(n+1)`
//! for type A). Types B, C, D enumerate the simple roots from the short or
//! fork end: `a1 = e1` (B), `a1 = 2e1` (C), `a1 = e1 + e2` (D) and
//! `ai = ei - e(i-1)` for `i > 1`.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use thiserror::Error;

pub type Q = Ratio<i64>;

fn q(n: i64) -> Q {
    Ratio::from_integer(n)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RootError {
    #[error("unsupported root system {0}{1}: {2}")]
    Unsupported(char, usize, &'static str),
    #[error("word {0:?} is not a reduced word of the longest element")]
    NotReduced(Vec<usize>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RootType {
    A,
    B,
    C,
    D,
}

impl RootType {
    pub fn parse(c: &str) -> Option<Self> {
        match c {
            "A" | "a" => Some(RootType::A),
            "B" | "b" => Some(RootType::B),
            "C" | "c" => Some(RootType::C),
            "D" | "d" => Some(RootType::D),
            _ => None,
        }
    }

    pub fn letter(&self) -> char {
        match self {
            RootType::A => 'A',
            RootType::B => 'B',
            RootType::C => 'C',
            RootType::D => 'D',
        }
    }
}

#[derive(Clone, Debug)]
pub struct RootSystem {
    typ: RootType,
    rank: usize,
    ambient: Vec<Vec<Q>>,
    gram: Vec<Vec<Q>>,
    cartan: Vec<Vec<i64>>,
    positive: Vec<Vec<i64>>,
    index: HashMap<Vec<i64>, usize>,
    rho: Vec<Q>,
}

/// Builds the root system of the given type and rank (`rank <= 4`).
pub fn build_root_system(typ: RootType, rank: usize) -> Result<RootSystem, RootError> {
    if rank == 0 {
        return Err(RootError::Unsupported(typ.letter(), rank, "rank must be positive"));
    }
    if rank > 4 {
        return Err(RootError::Unsupported(typ.letter(), rank, "rank above 4 is not supported"));
    }
    let n = rank;
    let dim = if typ == RootType::A { n + 1 } else { n };
    let mut ambient = vec![vec![q(0); dim]; n];
    match typ {
        RootType::A => {
            for i in 0..n {
                ambient[i][i] = q(1);
                ambient[i][i + 1] = q(-1);
            }
        }
        RootType::B | RootType::C | RootType::D => {
            if typ == RootType::D && n < 3 {
                return Err(RootError::Unsupported('D', n, "type D needs rank at least 3"));
            }
            if typ != RootType::A && n < 2 && typ != RootType::B {
                return Err(RootError::Unsupported(typ.letter(), n, "use type A for rank one"));
            }
            match typ {
                RootType::B => ambient[0][0] = q(1),
                RootType::C => ambient[0][0] = q(2),
                _ => {
                    ambient[0][0] = q(1);
                    ambient[0][1] = q(1);
                }
            }
            for i in 1..n {
                ambient[i][i] = q(1);
                ambient[i][i - 1] = q(-1);
            }
        }
    }
    let dot = |a: &[Q], b: &[Q]| a.iter().zip(b).fold(q(0), |s, (x, y)| s + x * y);
    let gram: Vec<Vec<Q>> = (0..n).map(|i| (0..n).map(|j| dot(&ambient[i], &ambient[j])).collect()).collect();
    let cartan: Vec<Vec<i64>> = (0..n)
        .map(|i| (0..n).map(|j| (q(2) * gram[j][i] / gram[i][i]).to_integer()).collect())
        .collect();

    // positive roots as the orbit of the simple roots under simple reflections
    let mut seen: BTreeSet<Vec<i64>> = BTreeSet::new();
    let mut queue: VecDeque<Vec<i64>> = VecDeque::new();
    for i in 0..n {
        let mut e = vec![0; n];
        e[i] = 1;
        seen.insert(e.clone());
        queue.push_back(e);
    }
    while let Some(b) = queue.pop_front() {
        for i in 0..n {
            let mut c = b.clone();
            let pair: i64 = (0..n).map(|j| b[j] * cartan[i][j]).sum();
            c[i] -= pair;
            if !seen.contains(&c) {
                seen.insert(c.clone());
                queue.push_back(c);
            }
        }
    }
    let mut positive: Vec<Vec<i64>> = seen.into_iter().filter(|r| r.iter().all(|&x| x >= 0)).collect();
    positive.sort_by(|a, b| {
        let ha: i64 = a.iter().sum();
        let hb: i64 = b.iter().sum();
        ha.cmp(&hb).then_with(|| b.cmp(a))
    });
    let index = positive.iter().enumerate().map(|(k, r)| (r.clone(), k)).collect();
    let mut rho = vec![q(0); n];
    for r in &positive {
        for i in 0..n {
            rho[i] += Ratio::new(r[i], 2);
        }
    }
    let rs = RootSystem { typ, rank: n, ambient, gram, cartan, positive, index, rho };
    Ok(rs)
}

impl RootSystem {
    pub fn root_type(&self) -> RootType {
        self.typ
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn name(&self) -> String {
        format!("{}{}", self.typ.letter(), self.rank)
    }

    /// `a_{ij} = (a_j, a_i^v)`.
    pub fn cartan(&self) -> &[Vec<i64>] {
        &self.cartan
    }

    /// Inner products of simple roots.
    pub fn simple_gram(&self) -> &[Vec<Q>] {
        &self.gram
    }

    pub fn positive_roots(&self) -> &[Vec<i64>] {
        &self.positive
    }

    pub fn num_positive(&self) -> usize {
        self.positive.len()
    }

    pub fn root_index(&self, r: &[i64]) -> Option<usize> {
        self.index.get(r).copied()
    }

    pub fn simple_root(&self, i: usize) -> Vec<i64> {
        let mut e = vec![0; self.rank];
        e[i] = 1;
        e
    }

    pub fn simple_index(&self, r: &[i64]) -> Option<usize> {
        if r.iter().sum::<i64>() == 1 && r.iter().all(|&x| x >= 0) {
            r.iter().position(|&x| x == 1)
        } else {
            None
        }
    }

    /// Half-sum of positive roots in simple-root coordinates.
    pub fn rho(&self) -> &[Q] {
        &self.rho
    }

    /// Inner product of two vectors given in simple-root coordinates.
    pub fn ip<A: Copy + Into<Q>, B: Copy + Into<Q>>(&self, a: &[A], b: &[B]) -> Q {
        let mut s = q(0);
        for i in 0..self.rank {
            let ai: Q = a[i].into();
            if ai == q(0) {
                continue;
            }
            for j in 0..self.rank {
                let bj: Q = b[j].into();
                s += ai * self.gram[i][j] * bj;
            }
        }
        s
    }

    /// `(x, a^v) = 2 (x, a) / (a, a)` for a root `a`.
    pub fn coroot_pairing<A: Copy + Into<Q>>(&self, x: &[A], a: &[i64]) -> Q {
        q(2) * self.ip(x, a) / self.ip(a, a)
    }

    /// `(a, a) / 2`, the exponent with `q_a = q^{(a,a)/2}`.
    pub fn q_exp(&self, a: &[i64]) -> Q {
        self.ip(a, a) / q(2)
    }

    /// Pairing of a root with `rho`.
    pub fn rho_ip(&self, a: &[i64]) -> Q {
        let r: Vec<Q> = self.rho.clone();
        self.ip(&r, a)
    }

    /// Smallest `M` such that every `q`-exponent arising from root pairings
    /// and `q_a` powers is an integer multiple of `1/M`.
    pub fn required_m(&self) -> u32 {
        let mut m: i64 = 1;
        for r in &self.positive {
            m = m.lcm(self.q_exp(r).denom());
            for s in &self.positive {
                m = m.lcm(self.ip(r, s).denom());
            }
            m = m.lcm(self.rho_ip(r).denom());
        }
        m as u32
    }

    /// Ambient coordinates of a vector in simple-root coordinates.
    pub fn to_ambient<A: Copy + Into<Q>>(&self, a: &[A]) -> Vec<Q> {
        let dim = self.ambient[0].len();
        let mut v = vec![q(0); dim];
        for i in 0..self.rank {
            let ai: Q = a[i].into();
            for k in 0..dim {
                v[k] += ai * self.ambient[i][k];
            }
        }
        v
    }

    /// Human-readable name of a root in ambient coordinates, e.g. `e2-e1`.
    pub fn root_name(&self, a: &[i64]) -> String {
        let v = self.to_ambient(a);
        let mut s = String::new();
        for k in (0..v.len()).rev() {
            let c = v[k];
            if c == q(0) {
                continue;
            }
            let sign = if c < q(0) { "-" } else if s.is_empty() { "" } else { "+" };
            let abs = if c < q(0) { -c } else { c };
            let coef = if abs == q(1) { String::new() } else { abs.to_string() };
            s.push_str(&format!("{}{}e{}", sign, coef, k + 1));
        }
        s
    }

    /// Simple reflection `s_i` on a vector in simple-root coordinates.
    pub fn reflect(&self, i: usize, a: &[i64]) -> Vec<i64> {
        let pair: i64 = (0..self.rank).map(|j| a[j] * self.cartan[i][j]).sum();
        let mut c = a.to_vec();
        c[i] -= pair;
        c
    }

    fn reflect_q(&self, i: usize, a: &[Q]) -> Vec<Q> {
        let pair = (0..self.rank).fold(q(0), |s, j| s + a[j] * q(self.cartan[i][j]));
        let mut c = a.to_vec();
        c[i] -= pair;
        c
    }

    /// Braid order `m_ij`.
    pub fn braid_order(&self, i: usize, j: usize) -> usize {
        if i == j {
            return 1;
        }
        match self.cartan[i][j] * self.cartan[j][i] {
            0 => 2,
            1 => 3,
            2 => 4,
            3 => 6,
            _ => unreachable!("non-finite Cartan entry"),
        }
    }

    /// A reduced word of `w0` obtained by reflecting `rho` to the antidominant
    /// chamber, preferring the listed indices first.
    pub fn greedy_word(&self, prefer: &[usize]) -> Vec<usize> {
        let mut v: Vec<Q> = self.rho.clone();
        let mut word = Vec::new();
        let order: Vec<usize> = prefer.iter().copied().chain((0..self.rank).filter(|i| !prefer.contains(i))).collect();
        loop {
            let next = order.iter().copied().find(|&i| {
                let r: Vec<i64> = self.simple_root(i);
                self.coroot_pairing(&v, &r) > q(0)
            });
            match next {
                Some(i) => {
                    v = self.reflect_q(i, &v);
                    word.push(i);
                }
                None => break,
            }
        }
        word
    }

    /// Reduced words of `w0` (indices from 0). Exhaustive braid-move closure
    /// for rank up to 3; a single canonical word otherwise.
    pub fn reduced_words_w0(&self) -> Vec<Vec<usize>> {
        let start = self.greedy_word(&[]);
        if self.rank > 3 {
            return vec![start];
        }
        self.braid_closure(start, usize::MAX)
    }

    /// Words reachable by braid moves, stopping after `budget` words.
    pub fn braid_closure(&self, start: Vec<usize>, budget: usize) -> Vec<Vec<usize>> {
        let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
        let mut queue = VecDeque::new();
        seen.insert(start.clone());
        queue.push_back(start);
        while let Some(w) = queue.pop_front() {
            if seen.len() >= budget {
                break;
            }
            for p in 0..w.len() {
                for j in 0..self.rank {
                    let i = w[p];
                    if i == j {
                        continue;
                    }
                    let m = self.braid_order(i, j);
                    if p + m > w.len() {
                        continue;
                    }
                    let matches = (0..m).all(|k| w[p + k] == if k % 2 == 0 { i } else { j });
                    if !matches {
                        continue;
                    }
                    let mut c = w.clone();
                    for k in 0..m {
                        c[p + k] = if k % 2 == 0 { j } else { i };
                    }
                    if seen.insert(c.clone()) {
                        queue.push_back(c);
                    }
                }
            }
        }
        seen.into_iter().collect()
    }

    /// The orbit sequence `mu^k = s_{i1}...s_{i(k-1)}(a_{ik})` of a reduced word.
    pub fn normal_ordering_from_word(&self, word: &[usize]) -> Result<NormalOrdering, RootError> {
        if word.len() != self.num_positive() || word.iter().any(|&i| i >= self.rank) {
            return Err(RootError::NotReduced(word.to_vec()));
        }
        let mut roots = Vec::with_capacity(word.len());
        for k in 0..word.len() {
            let mut r = self.simple_root(word[k]);
            for &i in word[..k].iter().rev() {
                r = self.reflect(i, &r);
            }
            match self.root_index(&r) {
                Some(idx) if !roots.contains(&idx) => roots.push(idx),
                _ => return Err(RootError::NotReduced(word.to_vec())),
            }
        }
        Ok(NormalOrdering { roots, word: word.to_vec() })
    }

    /// Checks that `seq` lists every positive root once and that each sum
    /// `a + b` of positive roots lies between `a` and `b`.
    pub fn validate_normality(&self, seq: &[usize]) -> bool {
        let n = self.num_positive();
        if seq.len() != n {
            return false;
        }
        let mut pos = vec![usize::MAX; n];
        for (k, &r) in seq.iter().enumerate() {
            if r >= n || pos[r] != usize::MAX {
                return false;
            }
            pos[r] = k;
        }
        for a in 0..n {
            for b in 0..n {
                let s: Vec<i64> = self.positive[a].iter().zip(&self.positive[b]).map(|(x, y)| x + y).collect();
                if let Some(c) = self.root_index(&s) {
                    let (lo, hi) = (pos[a].min(pos[b]), pos[a].max(pos[b]));
                    if !(lo < pos[c] && pos[c] < hi) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Positive roots in the span of the given simple roots.
    pub fn levi_roots(&self, levi: &[usize]) -> Vec<usize> {
        (0..self.num_positive())
            .filter(|&k| self.positive[k].iter().enumerate().all(|(i, &c)| c == 0 || levi.contains(&i)))
            .collect()
    }

    pub fn levi(&self, levi: &[usize]) -> LeviData {
        let mut simple: Vec<usize> = levi.to_vec();
        simple.sort_unstable();
        simple.dedup();
        let roots_k = self.levi_roots(&simple);
        let roots_gk = (0..self.num_positive()).filter(|k| !roots_k.contains(k)).collect();
        let center = (0..self.rank).filter(|i| !simple.contains(i)).collect();
        LeviData { simple, roots_k, roots_gk, center }
    }

    /// A normal ordering with every root of the Levi subsystem after all
    /// other roots.
    pub fn levi_adapted_ordering(&self, levi: &[usize]) -> Result<NormalOrdering, RootError> {
        let data = self.levi(levi);
        let ok = |o: &NormalOrdering| {
            let tail = &o.roots[o.roots.len() - data.roots_k.len()..];
            data.roots_k.iter().all(|r| tail.contains(r))
        };
        let mut candidates = vec![self.greedy_word(&data.center), self.greedy_word(&data.simple)];
        for w in candidates.clone() {
            candidates.push(w.iter().rev().copied().collect());
        }
        for w in &candidates {
            if let Ok(o) = self.normal_ordering_from_word(w) {
                if ok(&o) {
                    return Ok(o);
                }
            }
        }
        for w in self.braid_closure(candidates[0].clone(), 200_000) {
            let o = self.normal_ordering_from_word(&w)?;
            if ok(&o) {
                return Ok(o);
            }
        }
        unreachable!("every Levi subsystem admits an adapted ordering")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalOrdering {
    /// Indices into [`RootSystem::positive_roots`].
    pub roots: Vec<usize>,
    /// The reduced word (0-based indices) it came from.
    pub word: Vec<usize>,
}

impl NormalOrdering {
    pub fn position(&self, root: usize) -> Option<usize> {
        self.roots.iter().position(|&r| r == root)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeviData {
    /// Simple roots of the Levi subalgebra.
    pub simple: Vec<usize>,
    /// Positive roots of the Levi subalgebra.
    pub roots_k: Vec<usize>,
    /// Remaining positive roots.
    pub roots_gk: Vec<usize>,
    /// Indices of fundamental weights spanning the center dual.
    pub center: Vec<usize>,
}

impl fmt::Display for RootSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bourbaki(typ: RootType, n: usize) -> Vec<Vec<i64>> {
        // a_ij = (a_j, a_i^v), Bourbaki numbering
        let mut c = vec![vec![0; n]; n];
        for i in 0..n {
            c[i][i] = 2;
            if i + 1 < n {
                c[i][i + 1] = -1;
                c[i + 1][i] = -1;
            }
        }
        match typ {
            RootType::A => {}
            RootType::B => c[n - 1][n - 2] = -2,
            RootType::C => c[n - 2][n - 1] = -2,
            RootType::D => {
                c[n - 2][n - 1] = 0;
                c[n - 1][n - 2] = 0;
                c[n - 3][n - 1] = -1;
                c[n - 1][n - 3] = -1;
            }
        }
        c
    }

    fn reversed(c: &[Vec<i64>]) -> Vec<Vec<i64>> {
        let n = c.len();
        (0..n).map(|i| (0..n).map(|j| c[n - 1 - i][n - 1 - j]).collect()).collect()
    }

    #[test]
    fn cartan_matrices_match_standard() {
        for (t, n) in [(RootType::A, 3), (RootType::B, 3), (RootType::C, 3), (RootType::D, 4), (RootType::B, 4)] {
            let rs = build_root_system(t, n).unwrap();
            let expect = if t == RootType::A { bourbaki(t, n) } else { reversed(&bourbaki(t, n)) };
            assert_eq!(rs.cartan(), &expect[..], "{:?}{}", t, n);
        }
    }

    #[test]
    fn root_counts() {
        let counts = [
            (RootType::A, 1, 1),
            (RootType::A, 2, 3),
            (RootType::A, 3, 6),
            (RootType::A, 4, 10),
            (RootType::B, 2, 4),
            (RootType::B, 3, 9),
            (RootType::B, 4, 16),
            (RootType::C, 3, 9),
            (RootType::D, 4, 12),
        ];
        for (t, n, c) in counts {
            assert_eq!(build_root_system(t, n).unwrap().num_positive(), c);
        }
        assert!(build_root_system(RootType::A, 5).is_err());
    }

    #[test]
    fn rho_pairs_to_one_with_simple_coroots() {
        for (t, n) in [(RootType::A, 3), (RootType::B, 2), (RootType::C, 3), (RootType::D, 4)] {
            let rs = build_root_system(t, n).unwrap();
            for i in 0..n {
                assert_eq!(rs.coroot_pairing(rs.rho(), &rs.simple_root(i)), q(1));
            }
        }
    }

    #[test]
    fn b2_data() {
        let rs = build_root_system(RootType::B, 2).unwrap();
        let names: Vec<String> = rs.positive_roots().iter().map(|r| rs.root_name(r)).collect();
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(sorted, vec!["e1", "e2", "e2+e1", "e2-e1"]);
        assert_eq!(rs.q_exp(&[1, 0]), Ratio::new(1, 2));
        assert_eq!(rs.q_exp(&[0, 1]), q(1));
        assert_eq!(rs.required_m(), 2);
        assert_eq!(build_root_system(RootType::A, 2).unwrap().required_m(), 1);
    }

    #[test]
    fn reduced_words_small_rank() {
        let a1 = build_root_system(RootType::A, 1).unwrap();
        assert_eq!(a1.reduced_words_w0(), vec![vec![0]]);
        let a2 = build_root_system(RootType::A, 2).unwrap();
        assert_eq!(a2.reduced_words_w0(), vec![vec![0, 1, 0], vec![1, 0, 1]]);
        let b2 = build_root_system(RootType::B, 2).unwrap();
        assert_eq!(b2.reduced_words_w0(), vec![vec![0, 1, 0, 1], vec![1, 0, 1, 0]]);
        assert_eq!(build_root_system(RootType::A, 3).unwrap().reduced_words_w0().len(), 16);
        assert_eq!(build_root_system(RootType::B, 3).unwrap().reduced_words_w0().len(), 42);
    }

    #[test]
    fn orderings_from_words() {
        let a2 = build_root_system(RootType::A, 2).unwrap();
        let o = a2.normal_ordering_from_word(&[0, 1, 0]).unwrap();
        let seq: Vec<&Vec<i64>> = o.roots.iter().map(|&k| &a2.positive_roots()[k]).collect();
        assert_eq!(seq, vec![&vec![1, 0], &vec![1, 1], &vec![0, 1]]);
        assert!(a2.validate_normality(&o.roots));
        let bad = vec![a2.root_index(&[1, 0]).unwrap(), a2.root_index(&[0, 1]).unwrap(), a2.root_index(&[1, 1]).unwrap()];
        assert!(!a2.validate_normality(&bad));
        assert!(a2.normal_ordering_from_word(&[0, 0, 1]).is_err());

        let b2 = build_root_system(RootType::B, 2).unwrap();
        let o = b2.normal_ordering_from_word(&[0, 1, 0, 1]).unwrap();
        let names: Vec<String> = o.roots.iter().map(|&k| b2.root_name(&b2.positive_roots()[k])).collect();
        assert_eq!(names, vec!["e1", "e2+e1", "e2", "e2-e1"]);
        assert!(b2.validate_normality(&o.roots));
    }

    #[test]
    fn every_reduced_word_gives_normal_ordering() {
        for (t, n) in [(RootType::A, 2), (RootType::B, 2), (RootType::A, 3), (RootType::B, 3), (RootType::C, 3)] {
            let rs = build_root_system(t, n).unwrap();
            for w in rs.reduced_words_w0() {
                let o = rs.normal_ordering_from_word(&w).unwrap();
                assert!(rs.validate_normality(&o.roots));
            }
        }
    }

    #[test]
    fn levi_adapted() {
        let b2 = build_root_system(RootType::B, 2).unwrap();
        let o = b2.levi_adapted_ordering(&[1]).unwrap();
        assert_eq!(b2.root_name(&b2.positive_roots()[*o.roots.last().unwrap()]), "e2-e1");
        assert!(b2.validate_normality(&o.roots));
        for (t, n) in [(RootType::A, 3), (RootType::B, 3), (RootType::D, 4), (RootType::B, 4)] {
            let rs = build_root_system(t, n).unwrap();
            for levi in [vec![], vec![0], vec![1, 2], (0..n).collect::<Vec<_>>()] {
                let o = rs.levi_adapted_ordering(&levi).unwrap();
                let d = rs.levi(&levi);
                let tail = &o.roots[o.roots.len() - d.roots_k.len()..];
                assert!(d.roots_k.iter().all(|r| tail.contains(r)));
                assert!(rs.validate_normality(&o.roots));
            }
        }
    }
}
