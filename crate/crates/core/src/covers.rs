//! Group labelings, cocycles, the f-cover, and holonomy.

use std::collections::{HashMap, HashSet, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{Face, PureComplex, Vertex};
use crate::groups::{subgroup_closure, Elem, GroupTable};
use crate::spectral::adjacency_spectrum;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoverError {
    #[error("({0},{1}) is not an edge")]
    NotAnEdge(Vertex, Vertex),
    #[error("labeling violates the cocycle condition on {0:?}")]
    NotACocycle(Face),
    #[error("base 1-skeleton is disconnected")]
    Disconnected,
    #[error("covers need dimension >= 2, got {0}")]
    DimTooSmall(usize),
    #[error("labeling has {got} entries, complex has {expected} edges")]
    WrongLength { got: usize, expected: usize },
    #[error("label {0} is not a group element")]
    BadLabel(Elem),
}

/// A map `X(1) → Γ`, indexed like `X.faces(1)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupLabeling {
    pub labels: Vec<Elem>,
}

impl GroupLabeling {
    pub fn new(x: &PureComplex, g: &GroupTable, labels: Vec<Elem>) -> Result<Self, CoverError> {
        if labels.len() != x.faces(1).len() {
            return Err(CoverError::WrongLength { got: labels.len(), expected: x.faces(1).len() });
        }
        if let Some(&b) = labels.iter().find(|&&l| l as usize >= g.order()) {
            return Err(CoverError::BadLabel(b));
        }
        Ok(GroupLabeling { labels })
    }

    pub fn get(&self, x: &PureComplex, u: Vertex, v: Vertex) -> Result<Elem, CoverError> {
        let e = [u.min(v), u.max(v)];
        x.position(&e).map(|p| self.labels[p]).ok_or(CoverError::NotAnEdge(u, v))
    }
}

/// `f⃗(u,v)`: the label if `u < v`, its inverse otherwise.
pub fn dir_label(x: &PureComplex, g: &GroupTable, f: &GroupLabeling, u: Vertex, v: Vertex) -> Result<Elem, CoverError> {
    let l = f.get(x, u, v)?;
    Ok(if u < v { l } else { g.inv(l) })
}

/// `f(ij) = h(i)⁻¹h(j)`.
pub fn coboundary(x: &PureComplex, g: &GroupTable, h: &HashMap<Vertex, Elem>) -> GroupLabeling {
    GroupLabeling { labels: x.faces(1).iter().map(|e| g.mul(g.inv(h[&e[0]]), h[&e[1]])).collect() }
}

/// First triangle violating `f(ij)f(jk) = f(ik)`, if any.
pub fn cocycle_witness(x: &PureComplex, g: &GroupTable, f: &GroupLabeling) -> Option<Face> {
    if x.dim() < 2 {
        return None;
    }
    x.faces(2)
        .iter()
        .find(|t| {
            let a = f.get(x, t[0], t[1]).unwrap();
            let b = f.get(x, t[1], t[2]).unwrap();
            let c = f.get(x, t[0], t[2]).unwrap();
            g.mul(a, b) != c
        })
        .cloned()
}

pub fn is_cocycle(x: &PureComplex, g: &GroupTable, f: &GroupLabeling) -> bool {
    cocycle_witness(x, g, f).is_none()
}

/// `f_N = π ∘ f`.
pub fn push_cocycle(x: &PureComplex, g: &GroupTable, f: &GroupLabeling, proj: &[Elem]) -> Result<GroupLabeling, CoverError> {
    if let Some(t) = cocycle_witness(x, g, f) {
        return Err(CoverError::NotACocycle(t));
    }
    Ok(GroupLabeling { labels: f.labels.iter().map(|&l| proj[l as usize]).collect() })
}

/// The f-cover `X^f` on `X(0) × Γ`; vertex `(v, h)` has id `pos(v)·|Γ| + h`.
#[derive(Clone, Debug)]
pub struct CoverComplex {
    pub complex: PureComplex,
    pub group_order: usize,
    pub base_vertices: Vec<Vertex>,
}

impl CoverComplex {
    pub fn decode(&self, id: Vertex) -> (Vertex, Elem) {
        let n = self.group_order as u32;
        (self.base_vertices[(id / n) as usize], id % n)
    }
    pub fn phi(&self, id: Vertex) -> Vertex {
        self.decode(id).0
    }
    pub fn to_file(&self) -> CoverFile {
        CoverFile {
            group_order: self.group_order,
            base_vertices: self.base_vertices.clone(),
            faces: self.complex.tops().iter().map(|t| t.iter().map(|&v| self.decode(v)).collect()).collect(),
            weights: self.complex.weights().to_vec(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoverFile {
    pub group_order: usize,
    pub base_vertices: Vec<Vertex>,
    /// lifted top faces as `(base vertex, element id)` pairs
    pub faces: Vec<Vec<(Vertex, Elem)>>,
    pub weights: Vec<f64>,
}

pub fn build_cover(x: &PureComplex, g: &GroupTable, f: &GroupLabeling) -> Result<CoverComplex, CoverError> {
    if x.dim() < 2 {
        return Err(CoverError::DimTooSmall(x.dim()));
    }
    if let Some(t) = cocycle_witness(x, g, f) {
        return Err(CoverError::NotACocycle(t));
    }
    let base = x.vertices();
    let pos: HashMap<Vertex, u32> = base.iter().enumerate().map(|(i, &v)| (v, i as u32)).collect();
    let n = g.order() as u32;
    let mut faces = Vec::with_capacity(x.tops().len() * g.order());
    for (t, &w) in x.tops().iter().zip(x.weights()) {
        let lab: Vec<Elem> = t[1..].iter().map(|&v| f.get(x, t[0], v).unwrap()).collect();
        for g0 in g.elements() {
            let mut lifted = vec![pos[&t[0]] * n + g0];
            lifted.extend(t[1..].iter().zip(&lab).map(|(v, &l)| pos[v] * n + g.mul(g0, l)));
            faces.push((lifted, w / g.order() as f64));
        }
    }
    let complex = PureComplex::build(x.dim(), faces).expect("lifted faces are distinct");
    Ok(CoverComplex { complex, group_order: g.order(), base_vertices: base })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TreeKind {
    Bfs,
    Dfs,
}

/// `H_v` from a spanning tree: each non-tree edge `(u,w)` contributes
/// `p(u)·f⃗(u,w)·p(w)⁻¹` where `p` is the tree-path product from `v`.
pub fn holonomy_subgroup(
    x: &PureComplex,
    g: &GroupTable,
    f: &GroupLabeling,
    v: Vertex,
    tree: TreeKind,
) -> Result<Vec<Elem>, CoverError> {
    let adj = adjacency(x);
    let mut p: HashMap<Vertex, Elem> = HashMap::from([(v, 0)]);
    let mut tree_edges: HashSet<(Vertex, Vertex)> = HashSet::new();
    let mut frontier = VecDeque::from([v]);
    while let Some(u) = match tree {
        TreeKind::Bfs => frontier.pop_front(),
        TreeKind::Dfs => frontier.pop_back(),
    } {
        let pu = p[&u];
        for &w in &adj[&u] {
            if let std::collections::hash_map::Entry::Vacant(e) = p.entry(w) {
                e.insert(g.mul(pu, dir_label(x, g, f, u, w)?));
                tree_edges.insert((u.min(w), u.max(w)));
                frontier.push_back(w);
            }
        }
    }
    if p.len() != x.num_vertices() {
        return Err(CoverError::Disconnected);
    }
    let mut gens = Vec::new();
    for e in x.faces(1) {
        if tree_edges.contains(&(e[0], e[1])) {
            continue;
        }
        let h = g.mul(g.mul(p[&e[0]], dir_label(x, g, f, e[0], e[1])?), g.inv(p[&e[1]]));
        gens.push(h);
    }
    gens.sort_unstable();
    gens.dedup();
    Ok(subgroup_closure(g, &gens))
}

fn adjacency(x: &PureComplex) -> HashMap<Vertex, Vec<Vertex>> {
    let mut adj: HashMap<Vertex, Vec<Vertex>> = x.vertices().into_iter().map(|v| (v, Vec::new())).collect();
    for e in x.faces(1) {
        adj.get_mut(&e[0]).unwrap().push(e[1]);
        adj.get_mut(&e[1]).unwrap().push(e[0]);
    }
    adj
}

/// Connected components of a complex's 1-skeleton: `(count, component of each vertex)`.
pub fn connected_components(x: &PureComplex) -> (usize, HashMap<Vertex, usize>) {
    let adj = adjacency(x);
    let mut comp: HashMap<Vertex, usize> = HashMap::new();
    let mut count = 0;
    for v in x.vertices() {
        if comp.contains_key(&v) {
            continue;
        }
        let mut stack = vec![v];
        comp.insert(v, count);
        while let Some(u) = stack.pop() {
            for &w in &adj[&u] {
                if let std::collections::hash_map::Entry::Vacant(e) = comp.entry(w) {
                    e.insert(count);
                    stack.push(w);
                }
            }
        }
        count += 1;
    }
    (count, comp)
}

#[derive(Clone, Debug, Serialize)]
pub struct CoverReport {
    pub surjective: bool,
    pub faces_checked: usize,
    pub violations: Vec<Face>,
    pub pass: bool,
}

/// Exhaustive local-isomorphism audit: for every nonempty non-top face `s̃`,
/// `φ` must carry the weighted link `X̃_s̃` bijectively onto `X_φ(s̃)`.
pub fn verify_cover(cover: &PureComplex, base: &PureComplex, phi: &(dyn Fn(Vertex) -> Vertex + Sync)) -> CoverReport {
    let image = |f: &[Vertex]| -> Face {
        let mut im: Face = f.iter().map(|&v| phi(v)).collect();
        im.sort_unstable();
        im
    };
    let top_images: HashSet<Face> = cover.tops().iter().map(|t| image(t)).collect();
    let surjective = base.tops().iter().all(|t| top_images.contains(t));
    let faces: Vec<&Face> = (0..cover.dim()).flat_map(|k| cover.faces(k).iter()).collect();
    let violations: Vec<Face> = faces
        .par_iter()
        .filter(|s| !link_isomorphic(cover, base, s, &image, phi))
        .map(|s| (*s).clone())
        .collect();
    CoverReport { surjective, faces_checked: faces.len(), pass: surjective && violations.is_empty(), violations }
}

fn link_isomorphic(
    cover: &PureComplex,
    base: &PureComplex,
    s: &Face,
    image: &dyn Fn(&[Vertex]) -> Face,
    phi: &(dyn Fn(Vertex) -> Vertex + Sync),
) -> bool {
    let bs = image(s);
    if bs.windows(2).any(|w| w[0] == w[1]) {
        return false;
    }
    let Some(bcof) = base.cofaces(&bs) else { return false };
    let ccof = cover.cofaces(s).unwrap_or(&[]);
    if ccof.len() != bcof.len() {
        return false;
    }
    // link vertices must map injectively
    let lv: HashSet<Vertex> =
        ccof.iter().flat_map(|&t| cover.tops()[t as usize].iter().copied()).filter(|v| !s.contains(v)).collect();
    let lv_img: HashSet<Vertex> = lv.iter().map(|&v| phi(v)).collect();
    if lv.len() != lv_img.len() {
        return false;
    }
    let ctot: f64 = ccof.iter().map(|&t| cover.weights()[t as usize]).sum();
    let btot: f64 = bcof.iter().map(|&t| base.weights()[t as usize]).sum();
    let bw: HashMap<&Face, f64> =
        bcof.iter().map(|&t| (&base.tops()[t as usize], base.weights()[t as usize] / btot)).collect();
    let mut hit = HashSet::new();
    for &t in ccof {
        let im = image(&cover.tops()[t as usize]);
        match bw.get(&im) {
            Some(&w) if (w - cover.weights()[t as usize] / ctot).abs() <= 1e-12 && hit.insert(im.clone()) => {}
            _ => return false,
        }
    }
    true
}

/// `max_s |Σ_{φ(s̃)=s} μ̃(s̃) − μ(s)|` over top faces.
pub fn pushforward_error(cover: &CoverComplex, base: &PureComplex) -> f64 {
    let mut acc: HashMap<Face, f64> = HashMap::new();
    for (t, &w) in cover.complex.tops().iter().zip(cover.complex.weights()) {
        let mut im: Face = t.iter().map(|&v| cover.phi(v)).collect();
        im.sort_unstable();
        *acc.entry(im).or_default() += w;
    }
    base.tops()
        .iter()
        .zip(base.weights())
        .map(|(t, &w)| (acc.get(t).copied().unwrap_or(0.0) - w).abs())
        .fold(0.0, f64::max)
}

/// Largest eigenvalue discrepancy between each proper cover link (dimension
/// `≤ d−2`, nonempty face) and its base link.
pub fn link_spectra_gap(cover: &CoverComplex, base: &PureComplex) -> f64 {
    let d = base.dim();
    if d < 2 {
        return 0.0;
    }
    let faces: Vec<&Face> = (0..=d - 2).flat_map(|k| cover.complex.faces(k).iter()).collect();
    let mut cache: HashMap<Face, Vec<f64>> = HashMap::new();
    for k in 0..=d - 2 {
        for s in base.faces(k) {
            cache.insert(s.clone(), adjacency_spectrum(&base.link_skeleton(s).unwrap()).eigenvalues);
        }
    }
    faces
        .par_iter()
        .map(|s| {
            let mut bs: Face = s.iter().map(|&v| cover.phi(v)).collect();
            bs.sort_unstable();
            let ev = adjacency_spectrum(&cover.complex.link_skeleton(s).unwrap()).eigenvalues;
            let be = &cache[&bs];
            if ev.len() != be.len() {
                return f64::INFINITY;
            }
            ev.iter().zip(be).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}
