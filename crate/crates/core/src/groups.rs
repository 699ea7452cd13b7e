//! Finite groups as multiplication tables, symmetric generating sets, and
//! Cayley clique complexes.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{Face, PureComplex};
use crate::spectral::{self, HdxMode};

pub type Elem = u32;

pub const DEFAULT_ORDER_CAP: usize = 5040;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupError {
    #[error("group order {0} exceeds cap {1}")]
    TooLarge(usize, usize),
    #[error("not a group: {0}")]
    NotAGroup(String),
    #[error("generating set is not symmetric: inverse of {0} missing")]
    NotSymmetric(Elem),
    #[error("generating set contains the identity")]
    ContainsIdentity,
    #[error("generator {0} listed twice")]
    DuplicateGenerator(Elem),
    #[error("element {0} out of range")]
    BadElement(Elem),
    #[error("generators span a subgroup of order {0}, not the whole group")]
    NotGenerating(usize),
    #[error("Cayley clique complex is not pure at dimension {d}: edge {edge:?} lies in no {size}-clique")]
    NotPure { d: usize, edge: (Elem, Elem), size: usize },
    #[error("set is not a subgroup")]
    NotSubgroup,
    #[error("subgroup is not normal (conjugate by {0})")]
    NotNormal(Elem),
    #[error("dimension must be at least 1")]
    BadDim,
}

/// A finite group with identity 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupTable {
    n: usize,
    mul: Vec<Elem>,
    inv: Vec<Elem>,
}

impl GroupTable {
    fn from_fn(n: usize, cap: usize, f: impl Fn(usize, usize) -> usize) -> Result<Self, GroupError> {
        if n > cap {
            return Err(GroupError::TooLarge(n, cap));
        }
        let mut mul = vec![0; n * n];
        for a in 0..n {
            for b in 0..n {
                mul[a * n + b] = f(a, b) as Elem;
            }
        }
        let mut g = GroupTable { n, mul, inv: vec![] };
        g.fill_inverses()?;
        g.spot_check_associativity(500)?;
        Ok(g)
    }

    fn fill_inverses(&mut self) -> Result<(), GroupError> {
        let n = self.n;
        let mut inv = vec![Elem::MAX; n];
        for a in 0..n {
            for b in 0..n {
                if self.mul[a * n + b] == 0 {
                    inv[a] = b as Elem;
                    break;
                }
            }
            if inv[a] == Elem::MAX || self.mul[inv[a] as usize * n + a] != 0 {
                return Err(GroupError::NotAGroup(format!("element {a} has no two-sided inverse")));
            }
        }
        self.inv = inv;
        Ok(())
    }

    fn spot_check_associativity(&self, trials: usize) -> Result<(), GroupError> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..trials {
            let (a, b, c) = (
                rng.gen_range(0..self.n) as Elem,
                rng.gen_range(0..self.n) as Elem,
                rng.gen_range(0..self.n) as Elem,
            );
            if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)) {
                return Err(GroupError::NotAGroup(format!("({a}{b}){c} != {a}({b}{c})")));
            }
        }
        Ok(())
    }

    pub fn cyclic(n: usize) -> Result<Self, GroupError> {
        if n == 0 {
            return Err(GroupError::NotAGroup("order 0".into()));
        }
        Self::from_fn(n, DEFAULT_ORDER_CAP, |a, b| (a + b) % n)
    }

    /// Dihedral group of order `2n`; element `k + n·e` is `r^k s^e`.
    pub fn dihedral(n: usize) -> Result<Self, GroupError> {
        if n == 0 {
            return Err(GroupError::NotAGroup("order 0".into()));
        }
        Self::from_fn(2 * n, DEFAULT_ORDER_CAP, |a, b| {
            let (ka, ea) = (a % n, a / n);
            let (kb, eb) = (b % n, b / n);
            let k = if ea == 0 { (ka + kb) % n } else { (ka + n - kb) % n };
            k + n * ((ea + eb) % 2)
        })
    }

    /// Symmetric group on `k` points; permutations in lexicographic order,
    /// product `(p·q)(i) = p(q(i))`.
    pub fn symmetric(k: usize) -> Result<Self, GroupError> {
        let perms: Vec<Vec<usize>> = (0..k).permutations(k).collect();
        if perms.len() > DEFAULT_ORDER_CAP {
            return Err(GroupError::TooLarge(perms.len(), DEFAULT_ORDER_CAP));
        }
        let id: HashMap<Vec<usize>, usize> = perms.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        Self::from_fn(perms.len(), DEFAULT_ORDER_CAP, |a, b| {
            let c: Vec<usize> = (0..k).map(|i| perms[a][perms[b][i]]).collect();
            id[&c]
        })
    }

    /// Direct product; `(a, b)` has id `a·|H| + b`.
    pub fn product(g: &GroupTable, h: &GroupTable) -> Result<Self, GroupError> {
        let m = h.n;
        Self::from_fn(g.n * m, DEFAULT_ORDER_CAP, |x, y| {
            g.mul((x / m) as Elem, (y / m) as Elem) as usize * m + h.mul((x % m) as Elem, (y % m) as Elem) as usize
        })
    }

    /// Validate a raw table and relabel so the identity is 0.
    pub fn from_table(rows: &[Vec<Elem>]) -> Result<Self, GroupError> {
        let n = rows.len();
        if n == 0 {
            return Err(GroupError::NotAGroup("empty table".into()));
        }
        if n > DEFAULT_ORDER_CAP {
            return Err(GroupError::TooLarge(n, DEFAULT_ORDER_CAP));
        }
        for r in rows {
            if r.len() != n {
                return Err(GroupError::NotAGroup("table is not square".into()));
            }
            if let Some(&x) = r.iter().find(|&&x| x as usize >= n) {
                return Err(GroupError::BadElement(x));
            }
        }
        for i in 0..n {
            let row: HashSet<Elem> = rows[i].iter().copied().collect();
            let col: HashSet<Elem> = (0..n).map(|j| rows[j][i]).collect();
            if row.len() != n || col.len() != n {
                return Err(GroupError::NotAGroup(format!("row/column {i} is not a permutation")));
            }
        }
        let e = (0..n)
            .find(|&e| (0..n).all(|x| rows[e][x] as usize == x && rows[x][e] as usize == x))
            .ok_or_else(|| GroupError::NotAGroup("no identity".into()))?;
        let swap = |x: usize| if x == e { 0 } else if x == 0 { e } else { x };
        let mut mul = vec![0; n * n];
        for a in 0..n {
            for b in 0..n {
                mul[swap(a) * n + swap(b)] = swap(rows[a][b] as usize) as Elem;
            }
        }
        let mut g = GroupTable { n, mul, inv: vec![] };
        g.fill_inverses()?;
        if n <= 256 {
            for a in 0..n as Elem {
                for b in 0..n as Elem {
                    let ab = g.mul(a, b);
                    for c in 0..n as Elem {
                        if g.mul(ab, c) != g.mul(a, g.mul(b, c)) {
                            return Err(GroupError::NotAGroup(format!("({a}{b}){c} != {a}({b}{c})")));
                        }
                    }
                }
            }
        } else {
            g.spot_check_associativity(20_000)?;
        }
        Ok(g)
    }

    pub fn order(&self) -> usize {
        self.n
    }
    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        self.mul[a as usize * self.n + b as usize]
    }
    #[inline]
    pub fn inv(&self, a: Elem) -> Elem {
        self.inv[a as usize]
    }
    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        0..self.n as Elem
    }
    pub fn table(&self) -> Vec<Vec<Elem>> {
        self.mul.chunks(self.n).map(|r| r.to_vec()).collect()
    }
    pub fn is_abelian(&self) -> bool {
        self.elements().all(|a| self.elements().all(|b| self.mul(a, b) == self.mul(b, a)))
    }
    /// Some non-commuting pair, if any.
    pub fn non_abelian_witness(&self) -> Option<(Elem, Elem)> {
        self.elements()
            .flat_map(|a| self.elements().map(move |b| (a, b)))
            .find(|&(a, b)| self.mul(a, b) != self.mul(b, a))
    }
    pub fn element_order(&self, g: Elem) -> usize {
        let mut x = g;
        let mut k = 1;
        while x != 0 {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }
    pub fn product_of(&self, word: impl IntoIterator<Item = Elem>) -> Elem {
        word.into_iter().fold(0, |acc, x| self.mul(acc, x))
    }
}

/// JSON group description.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupSpec {
    Cyclic { n: usize },
    Dihedral { n: usize },
    Symmetric { k: usize },
    Product { a: Box<GroupSpec>, b: Box<GroupSpec> },
    Table { mul: Vec<Vec<Elem>> },
}

impl GroupSpec {
    pub fn build(&self) -> Result<GroupTable, GroupError> {
        match self {
            GroupSpec::Cyclic { n } => GroupTable::cyclic(*n),
            GroupSpec::Dihedral { n } => GroupTable::dihedral(*n),
            GroupSpec::Symmetric { k } => GroupTable::symmetric(*k),
            GroupSpec::Product { a, b } => GroupTable::product(&a.build()?, &b.build()?),
            GroupSpec::Table { mul } => GroupTable::from_table(mul),
        }
    }
}

/// Smallest subgroup containing `seeds`, sorted.
pub fn subgroup_closure(g: &GroupTable, seeds: &[Elem]) -> Vec<Elem> {
    let mut seen = vec![false; g.order()];
    seen[0] = true;
    let mut queue = VecDeque::from([0 as Elem]);
    while let Some(x) = queue.pop_front() {
        for &s in seeds {
            let y = g.mul(x, s);
            if !seen[y as usize] {
                seen[y as usize] = true;
                queue.push_back(y);
            }
        }
    }
    (0..g.order() as Elem).filter(|&x| seen[x as usize]).collect()
}

pub fn is_subgroup(g: &GroupTable, set: &[Elem]) -> bool {
    let s: HashSet<Elem> = set.iter().copied().collect();
    s.contains(&0) && s.iter().all(|&a| s.contains(&g.inv(a)) && s.iter().all(|&b| s.contains(&g.mul(a, b))))
}

/// `Ok` if `n` is a normal subgroup, else the failing reason.
pub fn check_normal(g: &GroupTable, n: &[Elem]) -> Result<(), GroupError> {
    if !is_subgroup(g, n) {
        return Err(GroupError::NotSubgroup);
    }
    let s: HashSet<Elem> = n.iter().copied().collect();
    for x in g.elements() {
        if n.iter().any(|&h| !s.contains(&g.mul(g.mul(x, h), g.inv(x)))) {
            return Err(GroupError::NotNormal(x));
        }
    }
    Ok(())
}

/// `Γ/N` with the projection `g ↦ gN`; cosets numbered by smallest member.
pub fn quotient_group(g: &GroupTable, n: &[Elem]) -> Result<(GroupTable, Vec<Elem>), GroupError> {
    check_normal(g, n)?;
    let mut proj = vec![Elem::MAX; g.order()];
    let mut reps = Vec::new();
    for x in g.elements() {
        if proj[x as usize] == Elem::MAX {
            let id = reps.len() as Elem;
            for &h in n {
                proj[g.mul(x, h) as usize] = id;
            }
            reps.push(x);
        }
    }
    let k = reps.len();
    let q = GroupTable::from_fn(k, usize::MAX, |a, b| proj[g.mul(reps[a], reps[b]) as usize] as usize)?;
    Ok((q, proj))
}

/// All subgroups, found by closing cyclic subgroups under joins.
pub fn subgroups(g: &GroupTable) -> Vec<Vec<Elem>> {
    let mut all: BTreeSet<Vec<Elem>> = g.elements().map(|x| subgroup_closure(g, &[x])).collect();
    loop {
        let cur: Vec<Vec<Elem>> = all.iter().cloned().collect();
        let mut added = false;
        for i in 0..cur.len() {
            for j in i + 1..cur.len() {
                let seeds: Vec<Elem> = cur[i].iter().chain(&cur[j]).copied().collect();
                if all.insert(subgroup_closure(g, &seeds)) {
                    added = true;
                }
            }
        }
        if !added {
            break;
        }
    }
    let mut v: Vec<Vec<Elem>> = all.into_iter().collect();
    v.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
    v
}

/// Normal subgroups ordered by increasing index.
pub fn normal_subgroups(g: &GroupTable) -> Vec<Vec<Elem>> {
    subgroups(g).into_iter().filter(|n| check_normal(g, n).is_ok()).collect()
}

/// A symmetric, identity-free, generating set with a fixed order `s_1..s_m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenSet {
    gens: Vec<Elem>,
    index: HashMap<Elem, usize>,
    inv_index: Vec<usize>,
}

impl GenSet {
    pub fn new(g: &GroupTable, gens: &[Elem]) -> Result<Self, GroupError> {
        let mut index = HashMap::new();
        for (i, &s) in gens.iter().enumerate() {
            if s as usize >= g.order() {
                return Err(GroupError::BadElement(s));
            }
            if s == 0 {
                return Err(GroupError::ContainsIdentity);
            }
            if index.insert(s, i).is_some() {
                return Err(GroupError::DuplicateGenerator(s));
            }
        }
        let mut inv_index = Vec::with_capacity(gens.len());
        for &s in gens {
            inv_index.push(*index.get(&g.inv(s)).ok_or(GroupError::NotSymmetric(s))?);
        }
        let span = subgroup_closure(g, gens).len();
        if span != g.order() {
            return Err(GroupError::NotGenerating(span));
        }
        Ok(GenSet { gens: gens.to_vec(), index, inv_index })
    }
    pub fn len(&self) -> usize {
        self.gens.len()
    }
    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }
    pub fn gens(&self) -> &[Elem] {
        &self.gens
    }
    pub fn get(&self, i: usize) -> Elem {
        self.gens[i]
    }
    pub fn index_of(&self, x: Elem) -> Option<usize> {
        self.index.get(&x).copied()
    }
    pub fn inverse_index(&self, i: usize) -> usize {
        self.inv_index[i]
    }
    pub fn contains(&self, x: Elem) -> bool {
        self.index.contains_key(&x)
    }
}

/// Cliques of size `size` in the graph on `verts` with adjacency `adj`, each sorted.
fn cliques(verts: &[Elem], size: usize, adj: &dyn Fn(Elem, Elem) -> bool) -> Vec<Vec<Elem>> {
    fn grow(
        cur: &mut Vec<Elem>,
        cand: &[Elem],
        size: usize,
        adj: &dyn Fn(Elem, Elem) -> bool,
        out: &mut Vec<Vec<Elem>>,
    ) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for (i, &v) in cand.iter().enumerate() {
            let next: Vec<Elem> = cand[i + 1..].iter().copied().filter(|&w| adj(v, w)).collect();
            cur.push(v);
            grow(cur, &next, size, adj, out);
            cur.pop();
        }
    }
    let mut vs = verts.to_vec();
    vs.sort_unstable();
    let mut out = Vec::new();
    grow(&mut Vec::new(), &vs, size, adj, &mut out);
    out
}

/// `C(Γ,S)` truncated to dimension `d`, uniform on top faces.
#[derive(Clone, Debug)]
pub struct CayleyCliqueComplex {
    pub d: usize,
    pub complex: PureComplex,
}

pub fn cayley_clique_complex(g: &GroupTable, s: &GenSet, d: usize) -> Result<CayleyCliqueComplex, GroupError> {
    if d == 0 {
        return Err(GroupError::BadDim);
    }
    let inset: Vec<bool> = g.elements().map(|x| s.contains(x)).collect();
    let adj = |a: Elem, b: Elem| inset[g.mul(g.inv(a), b) as usize];
    let mut tops: BTreeSet<Vec<Elem>> = BTreeSet::new();
    for x in g.elements() {
        // cliques whose minimum is x
        let nb: Vec<Elem> = s.gens().iter().map(|&t| g.mul(x, t)).filter(|&y| y > x).collect();
        for c in cliques(&nb, d, &adj) {
            let mut f = vec![x];
            f.extend(c);
            f.sort_unstable();
            tops.insert(f);
        }
    }
    let mut covered: HashSet<(Elem, Elem)> = HashSet::new();
    for t in &tops {
        for p in t.iter().copied().combinations(2) {
            covered.insert((p[0], p[1]));
        }
    }
    for x in g.elements() {
        for &t in s.gens() {
            let y = g.mul(x, t);
            let e = (x.min(y), x.max(y));
            if !covered.contains(&e) {
                return Err(GroupError::NotPure { d, edge: e, size: d + 1 });
            }
        }
    }
    let complex = PureComplex::uniform(d, tops.into_iter().collect()).expect("cliques are pure");
    Ok(CayleyCliqueComplex { d, complex })
}

impl CayleyCliqueComplex {
    pub fn link_of_identity(&self) -> PureComplex {
        self.complex.link(&[0]).expect("identity is a vertex")
    }
    pub fn link_of(&self, v: Elem) -> PureComplex {
        self.complex.link(&[v]).expect("vertex")
    }
}

/// The identity link `C_e` computed locally: cliques of size `d` in the graph on
/// `S` with `s ~ t` iff `s⁻¹t ∈ S`. Fails exactly when `C(Γ,S)` is not pure.
pub fn local_identity_link(g: &GroupTable, s: &GenSet, d: usize) -> Result<PureComplex, GroupError> {
    if d == 0 {
        return Err(GroupError::BadDim);
    }
    let adj = |a: Elem, b: Elem| s.contains(g.mul(g.inv(a), b));
    let tops = cliques(s.gens(), d, &adj);
    let covered: HashSet<Elem> = tops.iter().flatten().copied().collect();
    if let Some(&x) = s.gens().iter().find(|x| !covered.contains(x)) {
        return Err(GroupError::NotPure { d, edge: (0, x), size: d + 1 });
    }
    Ok(PureComplex::uniform(d - 1, tops).expect("pure by the check above"))
}

/// Worst two-sided link expansion of `C(Γ,S)` over proper links, read off `C_e`.
pub fn cayley_link_lambda(ce: &PureComplex) -> f64 {
    if ce.dim() == 0 {
        return 0.0;
    }
    spectral::is_hdx(ce, 1.0, HdxMode::TwoSided).worst.map_or(0.0, |w| w.value)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ScanCandidate {
    pub gens: Vec<Elem>,
    pub m: usize,
    pub lambda: f64,
    pub meets_target: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanResult {
    pub order: usize,
    pub d: usize,
    pub max_size: usize,
    pub eta_target: f64,
    pub enumerated: usize,
    pub truncated: bool,
    pub deduplicated_by_automorphism: bool,
    pub candidates: Vec<ScanCandidate>,
}

/// Automorphisms of `g` as permutations, found by mapping a small generating
/// set; `None` when the search would be too large.
pub fn automorphisms(g: &GroupTable, max_tuples: usize) -> Option<Vec<Vec<Elem>>> {
    let mut gens: Vec<Elem> = Vec::new();
    while subgroup_closure(g, &gens).len() < g.order() {
        let span: HashSet<Elem> = subgroup_closure(g, &gens).into_iter().collect();
        let next = g.elements().filter(|x| !span.contains(x)).max_by_key(|&x| g.element_order(x))?;
        gens.push(next);
    }
    let orders: Vec<usize> = gens.iter().map(|&x| g.element_order(x)).collect();
    let choices: Vec<Vec<Elem>> =
        orders.iter().map(|&o| g.elements().filter(|&y| g.element_order(y) == o).collect()).collect();
    let total: usize = choices.iter().map(|c| c.len()).product();
    if total > max_tuples {
        return None;
    }
    let mut out = Vec::new();
    for imgs in choices.iter().map(|c| c.iter().copied()).multi_cartesian_product() {
        let imgs: Vec<Elem> = if gens.is_empty() { vec![] } else { imgs };
        let mut map = vec![Elem::MAX; g.order()];
        map[0] = 0;
        let mut queue = VecDeque::from([0 as Elem]);
        let mut ok = true;
        'bfs: while let Some(x) = queue.pop_front() {
            for (i, &s) in gens.iter().enumerate() {
                let y = g.mul(x, s);
                let im = g.mul(map[x as usize], imgs[i]);
                if map[y as usize] == Elem::MAX {
                    map[y as usize] = im;
                    queue.push_back(y);
                } else if map[y as usize] != im {
                    ok = false;
                    break 'bfs;
                }
            }
        }
        if !ok || map.iter().collect::<HashSet<_>>().len() != g.order() {
            continue;
        }
        if g.elements().all(|a| g.elements().all(|b| map[g.mul(a, b) as usize] == g.mul(map[a as usize], map[b as usize]))) {
            out.push(map);
        }
    }
    if gens.is_empty() {
        out = vec![(0..g.order() as Elem).collect()];
    }
    Some(out)
}

/// Enumerate symmetric generating sets of size `≤ max_size`, keep those whose
/// clique complex is pure at dimension `d`, rank by worst link λ.
pub fn scan_gensets(g: &GroupTable, d: usize, max_size: usize, eta_target: f64, max_candidates: usize) -> ScanResult {
    let mut classes: Vec<Vec<Elem>> = Vec::new();
    let mut seen = vec![false; g.order()];
    for x in g.elements().skip(1) {
        if !seen[x as usize] {
            let y = g.inv(x);
            seen[x as usize] = true;
            seen[y as usize] = true;
            classes.push(if x == y { vec![x] } else { vec![x, y] });
        }
    }
    let mut sets: Vec<Vec<Elem>> = Vec::new();
    let mut truncated = false;
    fn rec(
        classes: &[Vec<Elem>],
        start: usize,
        cur: &mut Vec<Elem>,
        max_size: usize,
        cap: usize,
        out: &mut Vec<Vec<Elem>>,
        truncated: &mut bool,
    ) {
        for i in start..classes.len() {
            if cur.len() + classes[i].len() > max_size {
                continue;
            }
            if out.len() >= cap {
                *truncated = true;
                return;
            }
            let k = cur.len();
            cur.extend(&classes[i]);
            let mut s = cur.clone();
            s.sort_unstable();
            out.push(s);
            rec(classes, i + 1, cur, max_size, cap, out, truncated);
            cur.truncate(k);
        }
    }
    rec(&classes, 0, &mut Vec::new(), max_size, max_candidates, &mut sets, &mut truncated);
    let enumerated = sets.len();
    let mut dedup = false;
    if g.is_abelian() && g.order() <= 256 {
        if let Some(auts) = automorphisms(g, 100_000) {
            dedup = true;
            let canon: BTreeSet<Vec<Elem>> = sets
                .par_iter()
                .map(|s| {
                    auts.iter()
                        .map(|a| {
                            let mut im: Vec<Elem> = s.iter().map(|&x| a[x as usize]).collect();
                            im.sort_unstable();
                            im
                        })
                        .min()
                        .expect("identity automorphism")
                })
                .collect();
            sets = canon.into_iter().collect();
        }
    }
    let mut candidates: Vec<ScanCandidate> = sets
        .par_iter()
        .filter_map(|s| {
            let gs = GenSet::new(g, s).ok()?;
            let ce = local_identity_link(g, &gs, d).ok()?;
            let lambda = cayley_link_lambda(&ce);
            Some(ScanCandidate { gens: s.clone(), m: s.len(), lambda, meets_target: lambda <= eta_target })
        })
        .collect();
    candidates.sort_by(|a, b| a.lambda.total_cmp(&b.lambda).then(a.m.cmp(&b.m)).then(a.gens.cmp(&b.gens)));
    ScanResult {
        order: g.order(),
        d,
        max_size,
        eta_target,
        enumerated,
        truncated,
        deduplicated_by_automorphism: dedup,
        candidates,
    }
}

/// Weighted isomorphism test for small complexes (backtracking on vertices).
pub fn weighted_isomorphic(a: &PureComplex, b: &PureComplex, tol: f64) -> bool {
    if a.dim() != b.dim() || a.tops().len() != b.tops().len() || a.num_vertices() != b.num_vertices() {
        return false;
    }
    let av = a.vertices();
    let bv = b.vertices();
    let bw: HashMap<&Face, f64> = b.tops().iter().zip(b.weights().iter().copied()).collect();
    let deg = |x: &PureComplex, v| x.cofaces(&[v]).map_or(0, |c| c.len());
    fn go(
        i: usize,
        av: &[u32],
        bv: &[u32],
        map: &mut HashMap<u32, u32>,
        used: &mut HashSet<u32>,
        a: &PureComplex,
        bw: &HashMap<&Face, f64>,
        tol: f64,
        deg: &dyn Fn(&PureComplex, u32) -> usize,
        b: &PureComplex,
    ) -> bool {
        if i == av.len() {
            return a.tops().iter().zip(a.weights()).all(|(t, w)| {
                let mut im: Face = t.iter().map(|v| map[v]).collect();
                im.sort_unstable();
                bw.get(&im).is_some_and(|x| (x - w).abs() <= tol)
            });
        }
        let v = av[i];
        for &u in bv {
            if used.contains(&u) || deg(a, v) != deg(b, u) {
                continue;
            }
            map.insert(v, u);
            used.insert(u);
            // prune: edges among mapped vertices must exist in b
            let ok = map.iter().all(|(&x, &y)| x == v || !a.contains(&sorted2(x, v)) || b.contains(&sorted2(y, u)));
            if ok && go(i + 1, av, bv, map, used, a, bw, tol, deg, b) {
                return true;
            }
            map.remove(&v);
            used.remove(&u);
        }
        false
    }
    fn sorted2(x: u32, y: u32) -> Vec<u32> {
        vec![x.min(y), x.max(y)]
    }
    go(0, &av, &bv, &mut HashMap::new(), &mut HashSet::new(), a, &bw, tol, &deg, b)
}
