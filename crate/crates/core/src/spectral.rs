//! Normalized adjacency spectra, HDX certification, expander mixing.

use std::collections::HashMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::complex::{Face, PureComplex, Vertex};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("self loop at {0}")]
    SelfLoop(Vertex),
    #[error("edge ({0},{1}) listed twice")]
    DuplicateEdge(Vertex, Vertex),
    #[error("edge ({0},{1}) has non-positive weight")]
    BadWeight(Vertex, Vertex),
    #[error("graph is not bipartite with the given sides (edge {0},{1})")]
    NotBipartite(Vertex, Vertex),
    #[error("exact enumeration over {0} vertices exceeds the subset limit {1}")]
    TooLargeForExact(usize, usize),
    #[error("alpha must be positive, got {0}")]
    NonPositiveAlpha(f64),
    #[error("H-edge ({0},{1}) has no preimage")]
    DegenerateColoring(Vertex, Vertex),
    #[error("edge ({0},{1}) maps to a non-edge")]
    NotHomomorphism(Vertex, Vertex),
    #[error("vertex {0} has no color")]
    Uncolored(Vertex),
}

/// A weighted graph; edge measure sums to 1, vertex measure is ½Σν(e).
#[derive(Clone, Debug)]
pub struct WGraph {
    labels: Vec<Vertex>,
    edges: Vec<(usize, usize, f64)>,
    vmass: Vec<f64>,
    adj: Vec<Vec<(usize, f64)>>,
    left: Option<Vec<bool>>,
}

impl WGraph {
    /// Vertices are the edge endpoints; weights are renormalized.
    pub fn from_edges(edges: &[(Vertex, Vertex, f64)]) -> Result<Self, SpectralError> {
        if edges.is_empty() {
            return Err(SpectralError::EmptyGraph);
        }
        let mut labels: Vec<Vertex> = edges.iter().flat_map(|&(u, v, _)| [u, v]).collect();
        labels.sort_unstable();
        labels.dedup();
        let pos: HashMap<Vertex, usize> = labels.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut seen = HashMap::new();
        let mut out = Vec::with_capacity(edges.len());
        let mut total = 0.0;
        for &(u, v, w) in edges {
            if u == v {
                return Err(SpectralError::SelfLoop(u));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(SpectralError::BadWeight(u, v));
            }
            let (a, b) = (pos[&u].min(pos[&v]), pos[&u].max(pos[&v]));
            if seen.insert((a, b), ()).is_some() {
                return Err(SpectralError::DuplicateEdge(u, v));
            }
            out.push((a, b, w));
            total += w;
        }
        out.sort_by_key(|x| (x.0, x.1));
        let n = labels.len();
        let mut vmass = vec![0.0; n];
        let mut adj = vec![Vec::new(); n];
        for e in &mut out {
            e.2 /= total;
            vmass[e.0] += e.2 / 2.0;
            vmass[e.1] += e.2 / 2.0;
            adj[e.0].push((e.1, e.2));
            adj[e.1].push((e.0, e.2));
        }
        Ok(WGraph { labels, edges: out, vmass, adj, left: None })
    }

    /// Declare the bipartition by its left side; every edge must cross.
    pub fn with_left_side(mut self, left: &[Vertex]) -> Result<Self, SpectralError> {
        let mut side = vec![false; self.n()];
        for (i, l) in self.labels.iter().enumerate() {
            side[i] = left.contains(l);
        }
        for &(a, b, _) in &self.edges {
            if side[a] == side[b] {
                return Err(SpectralError::NotBipartite(self.labels[a], self.labels[b]));
            }
        }
        self.left = Some(side);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }
    pub fn label(&self, i: usize) -> Vertex {
        self.labels[i]
    }
    pub fn labels(&self) -> &[Vertex] {
        &self.labels
    }
    pub fn index_of(&self, v: Vertex) -> Option<usize> {
        self.labels.binary_search(&v).ok()
    }
    /// Edges as `(i, j, ν)` with `i < j` vertex positions.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }
    pub fn vertex_mass(&self) -> &[f64] {
        &self.vmass
    }
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adj[i]
    }
    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }
    pub fn is_bipartite(&self) -> bool {
        self.left.is_some()
    }
    pub fn left_side(&self) -> Option<&[bool]> {
        self.left.as_deref()
    }
    pub fn edge_weights_by_label(&self) -> Vec<(Vertex, Vertex, f64)> {
        self.edges.iter().map(|&(a, b, w)| (self.labels[a], self.labels[b], w)).collect()
    }

    /// `(Af)(v) = E_{u~v} f(u)`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        (0..self.n())
            .map(|v| self.adj[v].iter().map(|&(u, w)| w * f[u]).sum::<f64>() / (2.0 * self.vmass[v]))
            .collect()
    }

    /// `⟨f,g⟩ = E_v f(v)g(v)`.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        (0..self.n()).map(|v| self.vmass[v] * f[v] * g[v]).sum()
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(u, _) in &self.adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// `D^{-1/2} W D^{-1/2}`, similar to `A`, with oriented edge mass ½ν(uv).
    pub fn symmetrized(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut m = DMatrix::zeros(n, n);
        for &(a, b, w) in &self.edges {
            let x = w / (2.0 * (self.vmass[a] * self.vmass[b]).sqrt());
            m[(a, b)] = x;
            m[(b, a)] = x;
        }
        m
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    pub eigenvalues: Vec<f64>,
    pub one_sided: f64,
    pub two_sided: f64,
    pub bipartite_lambda: Option<f64>,
}

pub fn sorted_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

pub fn adjacency_spectrum(g: &WGraph) -> SpectralReport {
    let ev = sorted_eigenvalues(g.symmetrized());
    let one = if ev.len() > 1 { ev[1] } else { 0.0 };
    let two = if ev.len() > 1 { ev[1].abs().max(ev[ev.len() - 1].abs()) } else { 0.0 };
    let bip = g.is_bipartite().then(|| bipartite_lambda(g));
    SpectralReport { eigenvalues: ev, one_sided: one, two_sided: two, bipartite_lambda: bip }
}

/// Second singular value of `D_L^{-1/2} W D_R^{-1/2}` with side measures Σν(e).
fn bipartite_lambda(g: &WGraph) -> f64 {
    let side = g.left.as_ref().expect("bipartite");
    let ls: Vec<usize> = (0..g.n()).filter(|&i| side[i]).collect();
    let rs: Vec<usize> = (0..g.n()).filter(|&i| !side[i]).collect();
    if ls.len() < 2 || rs.len() < 2 {
        return 0.0;
    }
    let lp: HashMap<usize, usize> = ls.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let rp: HashMap<usize, usize> = rs.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut m = DMatrix::zeros(ls.len(), rs.len());
    for &(a, b, w) in &g.edges {
        let (l, r) = if side[a] { (a, b) } else { (b, a) };
        // side measure is 2·vmass
        m[(lp[&l], rp[&r])] = w / (2.0 * (g.vmass[l] * g.vmass[r]).sqrt());
    }
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv[1]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HdxMode {
    OneSided,
    TwoSided,
    Bipartite,
}

pub fn lambda_report(g: &WGraph, mode: HdxMode) -> Result<f64, SpectralError> {
    match mode {
        HdxMode::Bipartite => {
            if !g.is_bipartite() {
                let e = g.edges[0];
                return Err(SpectralError::NotBipartite(g.labels[e.0], g.labels[e.1]));
            }
            Ok(bipartite_lambda(g))
        }
        HdxMode::OneSided => Ok(adjacency_spectrum(g).one_sided),
        HdxMode::TwoSided => Ok(adjacency_spectrum(g).two_sided),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LinkSpectrum {
    pub face: Face,
    pub vertices: usize,
    pub lambda2: f64,
    pub lambda_n: f64,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HdxReport {
    pub threshold: f64,
    pub mode: HdxMode,
    pub links: Vec<LinkSpectrum>,
    pub worst: Option<LinkSpectrum>,
    pub pass: bool,
}

pub fn link_spectrum(x: &PureComplex, s: &[Vertex], mode: HdxMode) -> LinkSpectrum {
    let g = x.link_skeleton(s).expect("face of dimension <= d-2");
    let rep = adjacency_spectrum(&g);
    let n = rep.eigenvalues.len();
    let value = match mode {
        HdxMode::OneSided | HdxMode::Bipartite => rep.one_sided,
        HdxMode::TwoSided => rep.two_sided,
    };
    LinkSpectrum {
        face: s.to_vec(),
        vertices: g.n(),
        lambda2: rep.one_sided,
        lambda_n: rep.eigenvalues[n - 1],
        value,
    }
}

/// Certify every link skeleton `X_s`, `s ∈ X(k)`, `-1 ≤ k ≤ d-2` (the empty face included).
pub fn is_hdx(x: &PureComplex, threshold: f64, mode: HdxMode) -> HdxReport {
    let mut faces: Vec<Face> = vec![Vec::new()];
    if x.dim() >= 2 {
        for k in 0..=x.dim() - 2 {
            faces.extend(x.faces(k).iter().cloned());
        }
    }
    if x.dim() == 0 {
        return HdxReport { threshold, mode, links: vec![], worst: None, pass: true };
    }
    let links: Vec<LinkSpectrum> = faces.par_iter().map(|s| link_spectrum(x, s, mode)).collect();
    let worst = links.iter().fold(None::<&LinkSpectrum>, |acc, l| match acc {
        Some(w) if w.value >= l.value => Some(w),
        _ => Some(l),
    });
    let worst = worst.cloned();
    let pass = links.iter().all(|l| l.value <= threshold);
    HdxReport { threshold, mode, links, worst, pass }
}

pub fn face_id(f: &[Vertex]) -> String {
    if f.is_empty() {
        return "empty".into();
    }
    f.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(".")
}

/// CSV with columns `face,lambda2,lambda_n,two_sided`.
pub fn spectra_csv(links: &[LinkSpectrum]) -> String {
    let mut out = String::from("face,lambda2,lambda_n,two_sided\n");
    for l in links {
        let two = l.lambda2.abs().max(l.lambda_n.abs());
        let _ = writeln!(out, "{},{:.12},{:.12},{:.12}", face_id(&l.face), l.lambda2, l.lambda_n, two);
    }
    out
}

// ---------------------------------------------------------------- mixing

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EmlStrategy {
    Exact,
    Sampled(usize),
}

#[derive(Clone, Debug, Serialize)]
pub struct EmlReport {
    /// max |ν(E(S,T)) − ν(S)ν(T)| / √(ν(S)ν(T))
    pub alpha: f64,
    /// same discrepancy normalized with the (1−ν(S))(1−ν(T)) factors
    pub alpha_full: f64,
    pub witness: (Vec<Vertex>, Vec<Vertex>),
    pub exact: bool,
    pub pairs: u64,
}

fn masks_to_labels(g: &WGraph, verts: &[usize], mask: u64) -> Vec<Vertex> {
    verts.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &v)| g.labels[v]).collect()
}

/// Subset-sum table over `items`.
fn subset_sums(items: &[f64]) -> Vec<f64> {
    let mut s = vec![0.0; 1 << items.len()];
    for m in 1..s.len() {
        let low = m.trailing_zeros() as usize;
        s[m] = s[m & (m - 1)] + items[low];
    }
    s
}

struct Sides {
    left: Vec<usize>,
    right: Vec<usize>,
    lmass: Vec<f64>,
    rmass: Vec<f64>,
    /// w[i][j]: edge mass between left i and right j in the EML sense
    w: Vec<Vec<f64>>,
}

/// Bipartite graphs use side measures and edge mass; general graphs use the
/// vertex measure and oriented mass ⟨A1_S,1_T⟩ on both sides.
fn eml_sides(g: &WGraph) -> Sides {
    if let Some(side) = &g.left {
        let left: Vec<usize> = (0..g.n()).filter(|&i| side[i]).collect();
        let right: Vec<usize> = (0..g.n()).filter(|&i| !side[i]).collect();
        let rp: HashMap<usize, usize> = right.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut w = vec![vec![0.0; right.len()]; left.len()];
        for (i, &l) in left.iter().enumerate() {
            for &(u, x) in &g.adj[l] {
                w[i][rp[&u]] += x;
            }
        }
        let lmass = left.iter().map(|&v| 2.0 * g.vmass[v]).collect();
        let rmass = right.iter().map(|&v| 2.0 * g.vmass[v]).collect();
        Sides { left, right, lmass, rmass, w }
    } else {
        let all: Vec<usize> = (0..g.n()).collect();
        let mut w = vec![vec![0.0; g.n()]; g.n()];
        for &(a, b, x) in &g.edges {
            w[a][b] += x / 2.0;
            w[b][a] += x / 2.0;
        }
        Sides { left: all.clone(), right: all, lmass: g.vmass.clone(), rmass: g.vmass.clone(), w }
    }
}

fn discrepancy(e: f64, s: f64, t: f64) -> (f64, f64) {
    let d = (e - s * t).abs();
    let a = d / (s * t).sqrt();
    let full_den = (s * t * (1.0 - s) * (1.0 - t)).sqrt();
    let f = if full_den > 1e-15 { d / full_den } else { 0.0 };
    (a, f)
}

/// Worst mixing discrepancy over (all or sampled) pairs; general graphs range
/// over disjoint `S,T`, bipartite graphs over `S ⊆ L, T ⊆ R`.
pub fn eml_discrepancy(
    g: &WGraph,
    strategy: EmlStrategy,
    subset_limit: usize,
    rng: &mut impl Rng,
) -> Result<EmlReport, SpectralError> {
    let sd = eml_sides(g);
    let bip = g.is_bipartite();
    let mut best = EmlReport { alpha: 0.0, alpha_full: 0.0, witness: (vec![], vec![]), exact: false, pairs: 0 };
    let consider = |smask: u64, tmask: u64, e: f64, s: f64, t: f64, best: &mut EmlReport| {
        best.pairs += 1;
        let (a, f) = discrepancy(e, s, t);
        if f > best.alpha_full {
            best.alpha_full = f;
        }
        if a > best.alpha {
            best.alpha = a;
            best.witness = (masks_to_labels(g, &sd.left, smask), masks_to_labels(g, &sd.right, tmask));
        }
    };
    match strategy {
        EmlStrategy::Exact => {
            let (nl, nr) = (sd.left.len(), sd.right.len());
            let too_big = if bip { nl.max(nr) > subset_limit } else { g.n() > subset_limit };
            if too_big || nl > 30 || nr > 30 {
                return Err(SpectralError::TooLargeForExact(if bip { nl.max(nr) } else { g.n() }, subset_limit));
            }
            best.exact = true;
            let smass = subset_sums(&sd.lmass);
            let tmass = subset_sums(&sd.rmass);
            for smask in 1u64..(1 << nl) {
                // row sums of w restricted to S
                let row: Vec<f64> = (0..nr)
                    .map(|j| (0..nl).filter(|i| smask >> i & 1 == 1).map(|i| sd.w[i][j]).sum())
                    .collect();
                let es = subset_sums(&row);
                let s = smass[smask as usize];
                if bip {
                    for tmask in 1u64..(1 << nr) {
                        consider(smask, tmask, es[tmask as usize], s, tmass[tmask as usize], &mut best);
                    }
                } else {
                    let comp = ((1u64 << nl) - 1) & !smask;
                    let mut t = comp;
                    while t > 0 {
                        consider(smask, t, es[t as usize], s, tmass[t as usize], &mut best);
                        t = (t - 1) & comp;
                    }
                }
            }
        }
        EmlStrategy::Sampled(k) => {
            for _ in 0..k {
                let smask: Vec<bool> = (0..sd.left.len()).map(|_| rng.gen_bool(0.5)).collect();
                let tmask: Vec<bool> = (0..sd.right.len())
                    .map(|j| rng.gen_bool(0.5) && (bip || !smask[j]))
                    .collect();
                let s: f64 = (0..sd.left.len()).filter(|&i| smask[i]).map(|i| sd.lmass[i]).sum();
                let t: f64 = (0..sd.right.len()).filter(|&j| tmask[j]).map(|j| sd.rmass[j]).sum();
                if s <= 0.0 || t <= 0.0 {
                    continue;
                }
                let mut e = 0.0;
                for i in (0..sd.left.len()).filter(|&i| smask[i]) {
                    for j in (0..sd.right.len()).filter(|&j| tmask[j]) {
                        e += sd.w[i][j];
                    }
                }
                best.pairs += 1;
                let (a, f) = discrepancy(e, s, t);
                best.alpha_full = best.alpha_full.max(f);
                if a > best.alpha {
                    best.alpha = a;
                    let pick = |v: &[usize], m: &[bool]| {
                        v.iter().zip(m).filter(|(_, &b)| b).map(|(&x, _)| g.labels[x]).collect()
                    };
                    best.witness = (pick(&sd.left, &smask), pick(&sd.right, &tmask));
                }
            }
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, Serialize)]
pub struct EmlCheck {
    pub lambda: f64,
    pub pairs: u64,
    pub violations: u64,
    /// max of lhs − rhs over all pairs (≤ 0 when the inequality holds)
    pub worst_excess: f64,
}

/// Exhaustive mixing-lemma check over all nonempty `S, T` (sides if bipartite).
pub fn eml_check(g: &WGraph, lambda: f64, subset_limit: usize) -> Result<EmlCheck, SpectralError> {
    let sd = eml_sides(g);
    let (nl, nr) = (sd.left.len(), sd.right.len());
    if nl.max(nr) > subset_limit || nl > 30 {
        return Err(SpectralError::TooLargeForExact(nl.max(nr), subset_limit));
    }
    let smass = subset_sums(&sd.lmass);
    let tmass = subset_sums(&sd.rmass);
    let results: Vec<(u64, u64, f64)> = (1u64..(1 << nl))
        .into_par_iter()
        .map(|smask| {
            let row: Vec<f64> = (0..nr)
                .map(|j| (0..nl).filter(|i| smask >> i & 1 == 1).map(|i| sd.w[i][j]).sum())
                .collect();
            let es = subset_sums(&row);
            let s = smass[smask as usize];
            let (mut pairs, mut bad, mut worst) = (0u64, 0u64, f64::NEG_INFINITY);
            for tmask in 1usize..(1 << nr) {
                let t = tmass[tmask];
                let lhs = (es[tmask] - s * t).abs();
                let rhs = lambda * (s * t * (1.0 - s).max(0.0) * (1.0 - t).max(0.0)).sqrt();
                let ex = lhs - rhs;
                pairs += 1;
                if ex > 1e-12 {
                    bad += 1;
                }
                worst = worst.max(ex);
            }
            (pairs, bad, worst)
        })
        .collect();
    let mut out = EmlCheck { lambda, pairs: 0, violations: 0, worst_excess: f64::NEG_INFINITY };
    for (p, b, w) in results {
        out.pairs += p;
        out.violations += b;
        out.worst_excess = out.worst_excess.max(w);
    }
    Ok(out)
}

/// `260·α·(1 + log₂(3/α))`.
pub fn converse_eml_bound(alpha: f64) -> Result<f64, SpectralError> {
    if !(alpha > 0.0) {
        return Err(SpectralError::NonPositiveAlpha(alpha));
    }
    Ok(260.0 * alpha * (1.0 + (3.0 / alpha).log2()))
}

/// The variant with `log₂(2/α)` that the proof actually reaches.
pub fn converse_eml_bound_proof_form(alpha: f64) -> Result<f64, SpectralError> {
    if !(alpha > 0.0) {
        return Err(SpectralError::NonPositiveAlpha(alpha));
    }
    Ok(260.0 * alpha * (1.0 + (2.0 / alpha).log2()))
}

// ---------------------------------------------------------------- colorings

/// Reweight `G` by the coloring measure `ν_f` induced by `f: V(G) → V(H)`.
pub fn coloring_measure(
    g: &WGraph,
    h: &WGraph,
    f: &HashMap<Vertex, Vertex>,
) -> Result<WGraph, SpectralError> {
    let hmass: HashMap<(Vertex, Vertex), f64> = h
        .edge_weights_by_label()
        .into_iter()
        .map(|(a, b, w)| ((a.min(b), a.max(b)), w))
        .collect();
    let mut fiber: HashMap<(Vertex, Vertex), f64> = HashMap::new();
    let mut keyed = Vec::with_capacity(g.edges.len());
    for (u, v, w) in g.edge_weights_by_label() {
        let fu = *f.get(&u).ok_or(SpectralError::Uncolored(u))?;
        let fv = *f.get(&v).ok_or(SpectralError::Uncolored(v))?;
        let key = (fu.min(fv), fu.max(fv));
        if fu == fv || !hmass.contains_key(&key) {
            return Err(SpectralError::NotHomomorphism(u, v));
        }
        *fiber.entry(key).or_default() += w;
        keyed.push((u, v, w, key));
    }
    let mut hkeys: Vec<_> = hmass.keys().copied().collect();
    hkeys.sort_unstable();
    if let Some(&(a, b)) = hkeys.iter().find(|k| !fiber.contains_key(k)) {
        return Err(SpectralError::DegenerateColoring(a, b));
    }
    let edges: Vec<(Vertex, Vertex, f64)> =
        keyed.into_iter().map(|(u, v, w, k)| (u, v, hmass[&k] * w / fiber[&k])).collect();
    WGraph::from_edges(&edges)
}

#[derive(Clone, Debug, Serialize)]
pub struct CompositionReport {
    pub lambda_h: f64,
    pub eta: f64,
    pub lambda_g: f64,
    pub lambda_h_one: f64,
    pub lambda_g_one: f64,
    pub bound: f64,
    pub holds: bool,
    pub holds_one_sided: bool,
}

/// Compare `λ(G, ν_f)` against `max(λ(H), η)` where `η` is the worst fiber
/// bipartite expansion.
pub fn composition_check(
    g: &WGraph,
    h: &WGraph,
    f: &HashMap<Vertex, Vertex>,
) -> Result<CompositionReport, SpectralError> {
    let gf = coloring_measure(g, h, f)?;
    let hs = adjacency_spectrum(h);
    let gs = adjacency_spectrum(&gf);
    let mut fibers: HashMap<(Vertex, Vertex), Vec<(Vertex, Vertex, f64)>> = HashMap::new();
    for (u, v, w) in g.edge_weights_by_label() {
        let (fu, fv) = (f[&u], f[&v]);
        let (l, r) = if fu < fv { (u, v) } else { (v, u) };
        fibers.entry((fu.min(fv), fu.max(fv))).or_default().push((l, r, w));
    }
    let mut eta: f64 = 0.0;
    for edges in fibers.values() {
        let left: Vec<Vertex> = edges.iter().map(|e| e.0).collect();
        let b = WGraph::from_edges(edges)?.with_left_side(&left)?;
        eta = eta.max(bipartite_lambda(&b));
    }
    let bound = hs.two_sided.max(eta);
    let bound_one = hs.one_sided.max(eta);
    Ok(CompositionReport {
        lambda_h: hs.two_sided,
        eta,
        lambda_g: gs.two_sided,
        lambda_h_one: hs.one_sided,
        lambda_g_one: gs.one_sided,
        bound,
        holds: gs.two_sided <= bound + 1e-7,
        holds_one_sided: gs.one_sided <= bound_one + 1e-7,
    })
}

// ---------------------------------------------------------------- trickle-down

#[derive(Clone, Debug, Serialize)]
pub struct TrickleCheck {
    pub level: usize,
    pub lambda: f64,
    pub bound: f64,
    pub face: Face,
    pub lambda2: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrickleReport {
    pub checks: Vec<TrickleCheck>,
    /// levels skipped because the link bound exceeded 1/2
    pub skipped_levels: Vec<usize>,
    pub holds: bool,
}

/// For each level `k ≤ d−2` whose links have one-sided `λ ≤ 1/2`, check every
/// connected level-`(k−1)` link against `λ/(1−λ)`.
pub fn trickle_down(x: &PureComplex) -> TrickleReport {
    let mut checks = Vec::new();
    let mut skipped = Vec::new();
    if x.dim() >= 2 {
        for k in 0..=x.dim() - 2 {
            let lam = x
                .faces(k)
                .par_iter()
                .map(|s| adjacency_spectrum(&x.link_skeleton(s).unwrap()).one_sided)
                .reduce(|| f64::NEG_INFINITY, f64::max)
                .max(0.0);
            if lam > 0.5 {
                skipped.push(k);
                continue;
            }
            let bound = lam / (1.0 - lam);
            let lower: Vec<Face> =
                if k == 0 { vec![Vec::new()] } else { x.faces(k - 1).to_vec() };
            let found: Vec<TrickleCheck> = lower
                .par_iter()
                .filter_map(|r| {
                    let g = x.link_skeleton(r).unwrap();
                    if !g.is_connected() {
                        return None;
                    }
                    let l2 = adjacency_spectrum(&g).one_sided;
                    Some(TrickleCheck { level: k, lambda: lam, bound, face: r.clone(), lambda2: l2, holds: l2 <= bound + 1e-7 })
                })
                .collect();
            checks.extend(found);
        }
    }
    let holds = checks.iter().all(|c| c.holds);
    TrickleReport { checks, skipped_levels: skipped, holds }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn kn(n: u32) -> WGraph {
        let e: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j, 1.0))).collect();
        WGraph::from_edges(&e).unwrap()
    }

    fn random_graph(n: u32, p: f64, rng: &mut ChaCha8Rng) -> WGraph {
        loop {
            let mut e = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    if rng.gen_bool(p) {
                        e.push((i, j, rng.gen_range(0.1..1.0)));
                    }
                }
            }
            if let Ok(g) = WGraph::from_edges(&e) {
                if g.n() == n as usize {
                    return g;
                }
            }
        }
    }

    /// Power iteration with deflation on the symmetrized matrix.
    fn power_oracle(m: &DMatrix<f64>) -> Vec<f64> {
        let n = m.nrows();
        // shift to make the spectrum positive, so the largest is dominant
        let shifted = m + DMatrix::identity(n, n) * 2.0;
        let mut found: Vec<(f64, Vec<f64>)> = Vec::new();
        for k in 0..n {
            let mut v: Vec<f64> = (0..n).map(|i| ((i * 7 + k * 3) % 11) as f64 + 1.0).collect();
            let mut val = 0.0;
            for _ in 0..20000 {
                for (_, u) in &found {
                    let d: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
                    v.iter_mut().zip(u).for_each(|(a, b)| *a -= d * b);
                }
                let w: Vec<f64> = (0..n).map(|i| (0..n).map(|j| shifted[(i, j)] * v[j]).sum()).collect();
                let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
                let next: Vec<f64> = w.iter().map(|x| x / norm).collect();
                let diff: f64 = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).sum();
                v = next;
                val = norm;
                if diff < 1e-14 {
                    break;
                }
            }
            found.push((val, v));
        }
        let mut ev: Vec<f64> = found.into_iter().map(|(l, _)| l - 2.0).collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }

    #[test]
    fn complete_graph_spectrum() {
        for n in 4..=9 {
            let rep = adjacency_spectrum(&kn(n));
            assert!((rep.eigenvalues[0] - 1.0).abs() < 1e-10);
            for &l in &rep.eigenvalues[1..] {
                assert!((l + 1.0 / (n as f64 - 1.0)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn disconnected_has_lambda2_one() {
        let g = WGraph::from_edges(&[(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert!((adjacency_spectrum(&g).one_sided - 1.0).abs() < 1e-10);
        assert!(!g.is_connected());
    }

    #[test]
    fn spectrum_matches_power_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..3 {
            let g = random_graph(8, 0.6, &mut rng);
            let ours = adjacency_spectrum(&g).eigenvalues;
            let oracle = power_oracle(&g.symmetrized());
            for (a, b) in ours.iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-7, "{ours:?} vs {oracle:?}");
            }
        }
    }

    #[test]
    fn bipartite_lambda_cases() {
        let mut e = Vec::new();
        for i in 0..3 {
            for j in 10..14 {
                e.push((i, j, 1.0));
            }
        }
        let g = WGraph::from_edges(&e).unwrap().with_left_side(&[0, 1, 2]).unwrap();
        assert!(lambda_report(&g, HdxMode::Bipartite).unwrap() < 1e-10);
        let cyc = WGraph::from_edges(&(0..6).map(|i| (i, (i + 1) % 6, 1.0)).collect::<Vec<_>>()).unwrap();
        assert!((lambda_report(&cyc, HdxMode::TwoSided).unwrap() - 1.0).abs() < 1e-10);
        assert!(lambda_report(&cyc, HdxMode::Bipartite).is_err());
    }

    #[test]
    fn bipartite_lambda_squared_is_two_step_walk() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut e = Vec::new();
        for i in 0..5u32 {
            for j in 5..10u32 {
                if rng.gen_bool(0.6) || j == i + 5 {
                    e.push((i, j, rng.gen_range(0.2..1.0)));
                }
            }
        }
        let g = WGraph::from_edges(&e).unwrap().with_left_side(&[0, 1, 2, 3, 4]).unwrap();
        let lb = lambda_report(&g, HdxMode::Bipartite).unwrap();
        // two-step walk L -> R -> L, symmetrized with the left side measure
        let nl = 5;
        let mut w = DMatrix::<f64>::zeros(nl, 5);
        for &(a, b, x) in g.edges() {
            w[(a, b - 5)] = x;
        }
        let dl: Vec<f64> = (0..nl).map(|i| w.row(i).sum()).collect();
        let dr: Vec<f64> = (0..5).map(|j| w.column(j).sum()).collect();
        let mut m = DMatrix::<f64>::zeros(nl, nl);
        for i in 0..nl {
            for k in 0..nl {
                let s: f64 = (0..5).map(|j| w[(i, j)] * w[(k, j)] / dr[j]).sum();
                m[(i, k)] = s / (dl[i] * dl[k]).sqrt();
            }
        }
        let ev = sorted_eigenvalues(m);
        assert!((ev[1] - lb * lb).abs() < 1e-7);
    }

    #[test]
    fn self_adjoint_and_stochastic() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = random_graph(9, 0.5, &mut rng);
        let ones = vec![1.0; g.n()];
        assert!(g.apply(&ones).iter().all(|x| (x - 1.0).abs() < 1e-9));
        for _ in 0..50 {
            let f: Vec<f64> = (0..g.n()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let h: Vec<f64> = (0..g.n()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            assert!((g.inner(&g.apply(&f), &h) - g.inner(&f, &g.apply(&h))).abs() < 1e-9);
        }
    }

    #[test]
    fn hdx_of_complete_complex() {
        let x = PureComplex::complete(6, 2).unwrap();
        let rep = is_hdx(&x, 0.5, HdxMode::TwoSided);
        assert!(rep.pass);
        assert_eq!(rep.links.len(), 7);
        let x = PureComplex::uniform(2, vec![vec![0, 1, 2], vec![0, 3, 4]]).unwrap();
        let rep = is_hdx(&x, 0.5, HdxMode::TwoSided);
        assert!(!rep.pass);
        // vertex 0's link is two disjoint edges: lambda_2 = 1
        let w = rep.worst.unwrap();
        assert!((w.value - 1.0).abs() < 1e-9);
        let l0 = rep.links.iter().find(|l| l.face == vec![0]).unwrap();
        assert!((l0.lambda2 - 1.0).abs() < 1e-9);
    }

    /// Independent route: enumerate S,T directly from edge lists.
    fn brute_alpha(g: &WGraph) -> f64 {
        let n = g.n();
        let mut best: f64 = 0.0;
        for s in 1u32..(1 << n) {
            for t in 1u32..(1 << n) {
                if s & t != 0 {
                    continue;
                }
                let ns: f64 = (0..n).filter(|i| s >> i & 1 == 1).map(|i| g.vertex_mass()[i]).sum();
                let nt: f64 = (0..n).filter(|i| t >> i & 1 == 1).map(|i| g.vertex_mass()[i]).sum();
                let mut e = 0.0;
                for &(a, b, w) in g.edges() {
                    if (s >> a & 1 == 1 && t >> b & 1 == 1) || (s >> b & 1 == 1 && t >> a & 1 == 1) {
                        e += w / 2.0;
                    }
                }
                best = best.max((e - ns * nt).abs() / (ns * nt).sqrt());
            }
        }
        best
    }

    #[test]
    fn eml_discrepancy_exact_matches_brute() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = random_graph(7, 0.6, &mut rng);
        let rep = eml_discrepancy(&g, EmlStrategy::Exact, 14, &mut rng).unwrap();
        assert!((rep.alpha - brute_alpha(&g)).abs() < 1e-12);
        let s = eml_discrepancy(&g, EmlStrategy::Sampled(200), 14, &mut rng).unwrap();
        assert!(s.alpha <= rep.alpha + 1e-12 && !s.exact);
    }

    #[test]
    fn eml_complete_bipartite_is_zero() {
        let mut e = Vec::new();
        for i in 0..4 {
            for j in 10..13 {
                e.push((i, j, 1.0));
            }
        }
        let g = WGraph::from_edges(&e).unwrap().with_left_side(&[0, 1, 2, 3]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let rep = eml_discrepancy(&g, EmlStrategy::Exact, 14, &mut rng).unwrap();
        assert!(rep.alpha < 1e-12);
        assert!(matches!(
            eml_discrepancy(&kn(16), EmlStrategy::Exact, 14, &mut rng),
            Err(SpectralError::TooLargeForExact(16, 14))
        ));
    }

    #[test]
    fn eml_holds_on_kn_and_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = kn(8);
        let c = eml_check(&g, adjacency_spectrum(&g).two_sided, 14).unwrap();
        assert_eq!(c.violations, 0);
        let g = random_graph(10, 0.5, &mut rng);
        let c = eml_check(&g, adjacency_spectrum(&g).two_sided, 14).unwrap();
        assert_eq!(c.violations, 0);
        assert_eq!(c.pairs, 1023 * 1023);
    }

    #[test]
    fn converse_bound_arithmetic() {
        assert!((converse_eml_bound(3.0).unwrap() - 780.0).abs() < 1e-9);
        let v = converse_eml_bound(0.03).unwrap();
        assert!((v - 260.0 * 0.03 * (1.0 + 100f64.log2())).abs() < 1e-9);
        assert!((v - 59.6).abs() < 0.1);
        assert!(converse_eml_bound(0.0).is_err());
        assert!(converse_eml_bound_proof_form(0.03).unwrap() < v);
    }

    #[test]
    fn coloring_measure_marginals() {
        // 9 vertices, 3 per color class, random edges between classes
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut e = Vec::new();
        for u in 0..9u32 {
            for v in u + 1..9 {
                if u % 3 != v % 3 && (rng.gen_bool(0.6) || v == u + 1) {
                    e.push((u, v, rng.gen_range(0.1..5.0)));
                }
            }
        }
        let g = WGraph::from_edges(&e).unwrap();
        let h = WGraph::from_edges(&[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let f: HashMap<Vertex, Vertex> = (0..9).map(|v| (v, v % 3)).collect();
        let gf = coloring_measure(&g, &h, &f).unwrap();
        for c in 0..3 {
            let m: f64 = (0..gf.n()).filter(|&i| gf.label(i) % 3 == c).map(|i| gf.vertex_mass()[i]).sum();
            assert!((m - 1.0 / 3.0).abs() < 1e-12);
        }
        let bad: HashMap<Vertex, Vertex> = (0..9).map(|v| (v, 0)).collect();
        assert!(coloring_measure(&g, &h, &bad).is_err());
        let g2 = WGraph::from_edges(&[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let f2: HashMap<Vertex, Vertex> = [(0, 0), (1, 1), (2, 0)].into_iter().collect();
        assert!(matches!(coloring_measure(&g2, &h, &f2), Err(SpectralError::DegenerateColoring(..))));
    }

    #[test]
    fn composition_on_complete_fibers() {
        // K_3 blown up with complete bipartite fibers
        let mut e = Vec::new();
        for u in 0..12u32 {
            for v in u + 1..12 {
                if u % 3 != v % 3 {
                    e.push((u, v, 1.0));
                }
            }
        }
        let g = WGraph::from_edges(&e).unwrap();
        let h = WGraph::from_edges(&[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let f: HashMap<Vertex, Vertex> = (0..12).map(|v| (v, v % 3)).collect();
        let rep = composition_check(&g, &h, &f).unwrap();
        assert!(rep.eta < 1e-10);
        assert!((rep.lambda_g - 0.5).abs() < 1e-9 && rep.holds);
        // isomorphism case
        let id: HashMap<Vertex, Vertex> = (0..3).map(|v| (v, v)).collect();
        let rep = composition_check(&h, &h, &id).unwrap();
        assert!((rep.lambda_g - rep.lambda_h).abs() < 1e-12);
    }

    #[test]
    fn trickle_down_on_complete() {
        let x = PureComplex::complete(7, 3).unwrap();
        let rep = trickle_down(&x);
        assert!(rep.holds);
        assert!(!rep.checks.is_empty());
    }

    #[test]
    fn csv_rows_match_links() {
        let x = PureComplex::complete(5, 2).unwrap();
        let rep = is_hdx(&x, 0.5, HdxMode::TwoSided);
        let csv = spectra_csv(&rep.links);
        assert_eq!(csv.lines().count(), rep.links.len() + 1);
        assert!(csv.contains("\nempty,"));
    }
}
