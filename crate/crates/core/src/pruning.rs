//! Random pruning of `X` against a Cayley clique complex `C(Γ,S)`.
//!
//! A labeling `f: X(1) → S` keeps exactly the faces on which it is a local
//! cocycle. Moser–Tardos resampling drives the labeling to a state where no
//! bad event (atypical tuple, non-expanding satisfaction graph, bad cover)
//! occurs, at which point the pruned complex is a certified expander with a
//! connected `Γ`-cover.

use std::collections::{BTreeMap, HashMap, HashSet};

use itertools::Itertools;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{factorial, ComplexError, Face, PureComplex, Vertex};
use crate::covers::GroupLabeling;
use crate::groups::{local_identity_link, Elem, GenSet, GroupError, GroupTable};
use crate::spectral::{adjacency_spectrum, coloring_measure, WGraph};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PruneError {
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("pruning needs dimension >= 2, got {0}")]
    DimTooSmall(usize),
    #[error("{0:?} is not a face")]
    NotAFace(Face),
    #[error("{0:?} is not satisfied")]
    UnsatisfiedBase(Face),
    #[error("{kind:?} is not defined at {face:?}")]
    BadKindForFace { kind: EventKind, face: Face },
    #[error("satisfaction graph of {face:?} is degenerate: {reason}")]
    DegenerateColoring { face: Face, reason: String },
    #[error("pattern {0:?} of the identity link has no realizing face")]
    Unmeasurable(Vec<Elem>),
    #[error("no top face is satisfied")]
    EmptyPruning,
    #[error("labeling has {got} entries, complex has {expected} edges")]
    WrongLength { got: usize, expected: usize },
}

/// Generator indices `0..m` per edge, in `X.faces(1)` order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Labeling {
    pub gens: Vec<u16>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum EventKind {
    At,
    Ne,
    Bc,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Event {
    pub kind: EventKind,
    pub face: Face,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PruneConfig {
    pub lambda: f64,
    pub r: f64,
    pub c: f64,
    pub eta: f64,
    /// NE fires when the satisfaction graph's two-sided λ exceeds this.
    pub ne_threshold: f64,
    /// Apply the AT lower bound only where `|X_τ(0)|/m^{ℓ+1}` reaches this;
    /// `None` always applies it.
    pub at_min_expected: Option<f64>,
    pub max_resamples: usize,
    /// Keep the resampled edge list in every transcript entry.
    pub record_scopes: bool,
}

impl PruneConfig {
    /// Thresholds as stated: band `[1/(r²m^{ℓ+1}), r²/m^{ℓ+1}]` always on, NE at `λ/2`.
    pub fn literal(lambda: f64) -> Self {
        PruneConfig {
            lambda,
            r: 1.5,
            c: 1.0,
            eta: 0.0,
            ne_threshold: lambda / 2.0,
            at_min_expected: None,
            max_resamples: 10_000,
            record_scopes: false,
        }
    }
    /// Desk-scale thresholds that terminate on small complete complexes.
    pub fn empirical(lambda: f64) -> Self {
        PruneConfig { r: 2.5, ne_threshold: lambda, at_min_expected: Some(4.0), ..Self::literal(lambda) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PruneStatus {
    Clean,
    BudgetExhausted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub iteration: usize,
    pub event: Event,
    pub scope_len: usize,
    pub changed: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scope: Option<Vec<u32>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PruneOutcome {
    pub status: PruneStatus,
    pub resamples: usize,
    pub labeling: Labeling,
    pub transcript: Vec<TranscriptEntry>,
    /// satisfied top faces of `X`
    pub y_faces: Vec<Face>,
    /// pruned measure on `y_faces`, when it exists
    pub y_weights: Option<Vec<f64>>,
    pub unmeasurable: Option<Vec<Elem>>,
    /// violated events per kind at the final labeling
    pub remaining: BTreeMap<EventKind, usize>,
    #[serde(skip)]
    pub y: Option<PureComplex>,
}

#[derive(Clone, Debug)]
pub struct SatGraph {
    pub face: Face,
    pub vertices: Vec<Vertex>,
    /// `ψ_σ(v) = f⃗(u_0, v)`
    pub coloring: HashMap<Vertex, Elem>,
    /// skeleton of `C_a`
    pub target: WGraph,
    /// `G_σ` under the coloring measure
    pub graph: WGraph,
}

#[derive(Clone, Debug, Serialize)]
pub struct Scope {
    pub edges: Vec<u32>,
    pub neighbor_events: usize,
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FaceFraction {
    pub level: usize,
    pub kept: usize,
    pub total: usize,
    pub fraction: f64,
    pub bound: f64,
    pub ok: bool,
}

enum EdgeIndex {
    Dense { n: usize, pos: Vec<u32> },
    Sparse(HashMap<(usize, usize), u32>),
}

/// Precomputed lookups for one `(X, Γ, S, d)` instance.
pub struct Pruner<'a> {
    pub x: &'a PureComplex,
    pub g: &'a GroupTable,
    pub s: &'a GenSet,
    /// identity link `C_e`
    pub ce: PureComplex,
    rank: HashMap<Vertex, usize>,
    edges: EdgeIndex,
    incident: Vec<Vec<u32>>,
    triangles_at: Vec<Vec<(Vertex, Vertex)>>,
    link_verts: HashMap<Face, Vec<(Vertex, f64)>>,
    link_skel: HashMap<Face, WGraph>,
    events: Vec<Event>,
}

impl<'a> Pruner<'a> {
    pub fn new(x: &'a PureComplex, g: &'a GroupTable, s: &'a GenSet) -> Result<Self, PruneError> {
        let d = x.dim();
        if d < 2 {
            return Err(PruneError::DimTooSmall(d));
        }
        let ce = local_identity_link(g, s, d)?;
        let verts = x.vertices();
        let rank: HashMap<Vertex, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let n = verts.len();
        let mut incident = vec![Vec::new(); n];
        let mut edges = if n <= 2048 {
            EdgeIndex::Dense { n, pos: vec![u32::MAX; n * n] }
        } else {
            EdgeIndex::Sparse(HashMap::new())
        };
        for (p, e) in x.faces(1).iter().enumerate() {
            let (a, b) = (rank[&e[0]], rank[&e[1]]);
            incident[a].push(p as u32);
            incident[b].push(p as u32);
            match &mut edges {
                EdgeIndex::Dense { n, pos } => pos[a * *n + b] = p as u32,
                EdgeIndex::Sparse(m) => {
                    m.insert((a, b), p as u32);
                }
            }
        }
        let mut triangles_at = vec![Vec::new(); n];
        for t in x.faces(2) {
            for i in 0..3 {
                let v = t[i];
                let (u, w) = (t[(i + 1) % 3], t[(i + 2) % 3]);
                triangles_at[rank[&v]].extend([(u, w), (w, u)]);
            }
        }
        let mut link_verts = HashMap::new();
        let mut link_skel = HashMap::new();
        for l in 0..d {
            for tau in x.faces(l) {
                link_verts.insert(tau.clone(), vertex_link_measure(x, tau));
                if l + 2 <= d {
                    link_skel.insert(tau.clone(), x.link_skeleton(tau)?);
                }
            }
        }
        let mut events = Vec::new();
        for l in 0..d {
            for tau in x.faces(l) {
                events.push(Event { kind: EventKind::At, face: tau.clone() });
                if l + 2 <= d {
                    events.push(Event { kind: EventKind::Ne, face: tau.clone() });
                }
                if l == 0 {
                    events.push(Event { kind: EventKind::Bc, face: tau.clone() });
                }
            }
        }
        events.sort();
        Ok(Pruner { x, g, s, ce, rank, edges, incident, triangles_at, link_verts, link_skel, events })
    }

    pub fn m(&self) -> usize {
        self.s.len()
    }

    /// The sorted event family `E_τ`, `τ ∈ X(ℓ)`, `ℓ ≤ d−1`.
    pub fn events(&self) -> &[Event] {
        &self.events
    }

    fn edge_pos(&self, u: Vertex, v: Vertex) -> u32 {
        let (a, b) = (self.rank[&u.min(v)], self.rank[&u.max(v)]);
        let p = match &self.edges {
            EdgeIndex::Dense { n, pos } => pos[a * n + b],
            EdgeIndex::Sparse(m) => m.get(&(a, b)).copied().unwrap_or(u32::MAX),
        };
        assert!(p != u32::MAX, "({u},{v}) is not an edge");
        p
    }

    /// Undirected label `f(uv)` as a group element.
    fn label(&self, f: &Labeling, u: Vertex, v: Vertex) -> Elem {
        self.s.get(f.gens[self.edge_pos(u, v) as usize] as usize)
    }

    /// `f⃗(u,v)`.
    pub fn dir(&self, f: &Labeling, u: Vertex, v: Vertex) -> Elem {
        let l = self.label(f, u, v);
        if u < v {
            l
        } else {
            self.g.inv(l)
        }
    }

    pub fn to_group_labeling(&self, f: &Labeling) -> GroupLabeling {
        GroupLabeling { labels: f.gens.iter().map(|&i| self.s.get(i as usize)).collect() }
    }

    /// `f|_Y` for a subcomplex `Y ⊆ X`, indexed like `Y.faces(1)`.
    pub fn restrict_labeling(&self, f: &Labeling, y: &PureComplex) -> GroupLabeling {
        GroupLabeling { labels: y.faces(1).iter().map(|e| self.label(f, e[0], e[1])).collect() }
    }

    pub fn sample_labeling(&self, rng: &mut impl Rng) -> Labeling {
        let m = self.m() as u16;
        Labeling { gens: (0..self.x.faces(1).len()).map(|_| rng.gen_range(0..m)).collect() }
    }

    pub fn check_labeling(&self, f: &Labeling) -> Result<(), PruneError> {
        let expected = self.x.faces(1).len();
        if f.gens.len() != expected || f.gens.iter().any(|&i| i as usize >= self.m()) {
            return Err(PruneError::WrongLength { got: f.gens.len(), expected });
        }
        Ok(())
    }

    /// Every triangle `v_i v_j v_k` (i<j<k) of the face satisfies `f(v_iv_j)f(v_jv_k) = f(v_iv_k)`.
    pub fn is_satisfied(&self, f: &Labeling, face: &[Vertex]) -> Result<bool, PruneError> {
        let face = crate::complex::canonical(face)?;
        if !self.x.contains(&face) {
            return Err(PruneError::NotAFace(face));
        }
        Ok(self.satisfied_unchecked(f, &face))
    }

    fn satisfied_unchecked(&self, f: &Labeling, face: &[Vertex]) -> bool {
        triangle_condition(self.g, face, |u, v| self.label(f, u, v))
    }

    pub fn satisfied_tops(&self, f: &Labeling) -> Vec<usize> {
        (0..self.x.tops().len()).into_par_iter().filter(|&i| self.satisfied_unchecked(f, &self.x.tops()[i])).collect()
    }

    /// The f-pruning with the restricted `X` measure; `None` when no top face survives.
    pub fn f_pruning(&self, f: &Labeling) -> Option<PureComplex> {
        let keep: HashSet<usize> = self.satisfied_tops(f).into_iter().collect();
        self.x.restrict(|i| keep.contains(&i))
    }

    /// `C_a` skeleton for a satisfied face with base labels `a∖{e}`.
    fn target_skeleton(&self, labels: &[Elem]) -> Result<WGraph, ComplexError> {
        if labels.is_empty() {
            self.ce.one_skeleton()
        } else {
            self.ce.link_skeleton(labels)
        }
    }

    pub fn satisfaction_graph(&self, f: &Labeling, sigma: &[Vertex]) -> Result<SatGraph, PruneError> {
        let sigma = crate::complex::canonical(sigma)?;
        let d = self.x.dim();
        if sigma.is_empty() || sigma.len() + 1 > d {
            return Err(PruneError::BadKindForFace { kind: EventKind::Ne, face: sigma });
        }
        if !self.is_satisfied(f, &sigma)? {
            return Err(PruneError::UnsatisfiedBase(sigma));
        }
        let degenerate = |reason: String| PruneError::DegenerateColoring { face: sigma.clone(), reason };
        let u0 = sigma[0];
        let mut base: Vec<Elem> = sigma[1..].iter().map(|&v| self.dir(f, u0, v)).collect();
        base.sort_unstable();
        let target = self.target_skeleton(&base).map_err(|e| degenerate(e.to_string()))?;
        let skel = &self.link_skel[&sigma];
        let with = |extra: &[Vertex]| {
            let mut ext = sigma.clone();
            ext.extend_from_slice(extra);
            ext.sort_unstable();
            self.satisfied_unchecked(f, &ext)
        };
        let vertices: Vec<Vertex> = skel.labels().iter().copied().filter(|&v| with(&[v])).collect();
        let edges: Vec<(Vertex, Vertex, f64)> = skel
            .edge_weights_by_label()
            .into_iter()
            .filter(|&(u, v, _)| with(&[u, v]))
            .collect();
        if edges.is_empty() {
            return Err(degenerate("no satisfied edges".into()));
        }
        let raw = WGraph::from_edges(&edges).map_err(|e| degenerate(e.to_string()))?;
        if raw.n() != vertices.len() {
            return Err(degenerate(format!("{} isolated vertices", vertices.len() - raw.n())));
        }
        let coloring: HashMap<Vertex, Elem> = vertices.iter().map(|&v| (v, self.dir(f, u0, v))).collect();
        let graph = coloring_measure(&raw, &target, &coloring).map_err(|e| degenerate(e.to_string()))?;
        Ok(SatGraph { face: sigma, vertices, coloring, target, graph })
    }

    /// `(kind, face)` validity per the event family.
    fn check_kind(&self, kind: EventKind, tau: &[Vertex]) -> Result<(), PruneError> {
        let d = self.x.dim();
        let ok = !tau.is_empty()
            && self.x.contains(tau)
            && match kind {
                EventKind::At => tau.len() <= d,
                EventKind::Ne => tau.len() < d,
                EventKind::Bc => tau.len() == 1,
            };
        if ok {
            Ok(())
        } else {
            Err(PruneError::BadKindForFace { kind, face: tau.to_vec() })
        }
    }

    pub fn eval_event(&self, f: &Labeling, kind: EventKind, tau: &[Vertex], cfg: &PruneConfig) -> Result<bool, PruneError> {
        let tau = crate::complex::canonical(tau)?;
        self.check_kind(kind, &tau)?;
        Ok(match kind {
            EventKind::At => self.atypical_tuple(f, &tau, cfg),
            EventKind::Ne => self.not_expander(f, &tau, cfg),
            EventKind::Bc => self.bad_cover(f, tau[0]),
        })
    }

    fn eval_unchecked(&self, f: &Labeling, ev: &Event, cfg: &PruneConfig) -> bool {
        match ev.kind {
            EventKind::At => self.atypical_tuple(f, &ev.face, cfg),
            EventKind::Ne => self.not_expander(f, &ev.face, cfg),
            EventKind::Bc => self.bad_cover(f, ev.face[0]),
        }
    }

    /// Tuple probabilities `Prob_{X_τ}[f⃗(v_j,u) = s_{i_j} ∀j]` for every tuple.
    pub fn tuple_distribution(&self, f: &Labeling, tau: &[Vertex]) -> HashMap<Vec<u16>, f64> {
        let mut dist: HashMap<Vec<u16>, f64> = HashMap::new();
        for &(u, p) in &self.link_verts[tau] {
            let key: Vec<u16> =
                tau.iter().map(|&v| self.s.index_of(self.dir(f, v, u)).expect("label in S") as u16).collect();
            *dist.entry(key).or_default() += p;
        }
        dist
    }

    fn atypical_tuple(&self, f: &Labeling, tau: &[Vertex], cfg: &PruneConfig) -> bool {
        let m = self.m() as f64;
        let tuples = m.powi(tau.len() as i32);
        let hi = cfg.r * cfg.r / tuples;
        let lo = 1.0 / (cfg.r * cfg.r * tuples);
        let link = &self.link_verts[tau];
        let lower_on = cfg.at_min_expected.is_none_or(|t| link.len() as f64 / tuples >= t);
        let dist = self.tuple_distribution(f, tau);
        if dist.values().any(|&p| p >= hi) {
            return true;
        }
        lower_on && (dist.len() < tuples as usize || dist.values().any(|&p| p <= lo))
    }

    fn not_expander(&self, f: &Labeling, tau: &[Vertex], cfg: &PruneConfig) -> bool {
        if !self.satisfied_unchecked(f, tau) {
            return false;
        }
        match self.satisfaction_graph(f, tau) {
            Ok(sg) => adjacency_spectrum(&sg.graph).two_sided > cfg.ne_threshold,
            Err(_) => true,
        }
    }

    fn bad_cover(&self, f: &Labeling, v: Vertex) -> bool {
        let mut seen = vec![false; self.g.order()];
        for &(u, w) in &self.triangles_at[self.rank[&v]] {
            let h = self.g.product_of([self.dir(f, v, u), self.dir(f, u, w), self.dir(f, w, v)]);
            seen[h as usize] = true;
        }
        self.s.gens().iter().any(|&s| !seen[s as usize])
    }

    fn scope_edges(&self, tau: &[Vertex]) -> Vec<u32> {
        let mut out: Vec<u32> = tau
            .iter()
            .copied()
            .chain(self.link_verts[tau].iter().map(|&(u, _)| u))
            .flat_map(|v| self.incident[self.rank[&v]].iter().copied())
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Edges read by the events at `τ`, and how many other event faces share one.
    pub fn dependency_scope(&self, tau: &[Vertex]) -> Result<Scope, PruneError> {
        let tau = crate::complex::canonical(tau)?;
        self.check_kind(EventKind::At, &tau)?;
        let edges = self.scope_edges(&tau);
        let mine: HashSet<u32> = edges.iter().copied().collect();
        let faces: Vec<&Face> = self.events.iter().map(|e| &e.face).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
        let neighbor_events = faces
            .par_iter()
            .filter(|t| ***t != tau && self.scope_edges(t).iter().any(|e| mine.contains(e)))
            .count();
        let d = self.x.dim() as f64;
        let q = self.x.max_degree() as f64;
        let r = self.incident.iter().map(Vec::len).max().unwrap_or(0) as f64;
        Ok(Scope { edges, neighbor_events, bound: d * 2f64.powf(d) * q * (1.0 + r + r * r) })
    }

    /// Redraw exactly the labels at `scope`, in order; returns how many changed.
    pub fn resample_scope(&self, f: &mut Labeling, scope: &[u32], rng: &mut impl Rng) -> usize {
        let m = self.m() as u16;
        let mut changed = 0;
        for &p in scope {
            let new = rng.gen_range(0..m);
            changed += usize::from(new != f.gens[p as usize]);
            f.gens[p as usize] = new;
        }
        changed
    }

    pub fn first_violated(&self, f: &Labeling, cfg: &PruneConfig) -> Option<&Event> {
        self.events.par_iter().find_first(|ev| self.eval_unchecked(f, ev, cfg))
    }

    pub fn violations(&self, f: &Labeling, cfg: &PruneConfig) -> BTreeMap<EventKind, usize> {
        let hits: Vec<EventKind> =
            self.events.par_iter().filter(|ev| self.eval_unchecked(f, ev, cfg)).map(|ev| ev.kind).collect();
        let mut out = BTreeMap::new();
        for k in hits {
            *out.entry(k).or_default() += 1;
        }
        out
    }

    /// Moser–Tardos: resample the scope of the lexicographically first violated event.
    pub fn moser_tardos(&self, cfg: &PruneConfig, rng: &mut impl Rng) -> PruneOutcome {
        let f = self.sample_labeling(rng);
        self.moser_tardos_from(f, cfg, rng).expect("sampled labelings have the right shape")
    }

    pub fn moser_tardos_from(&self, mut f: Labeling, cfg: &PruneConfig, rng: &mut impl Rng) -> Result<PruneOutcome, PruneError> {
        self.check_labeling(&f)?;
        let mut transcript = Vec::new();
        let mut resamples = 0;
        let status = loop {
            let Some(ev) = self.first_violated(&f, cfg) else { break PruneStatus::Clean };
            if resamples >= cfg.max_resamples {
                break PruneStatus::BudgetExhausted;
            }
            let scope = self.scope_edges(&ev.face);
            let changed = self.resample_scope(&mut f, &scope, rng);
            transcript.push(TranscriptEntry {
                iteration: resamples,
                event: ev.clone(),
                scope_len: scope.len(),
                changed,
                scope: cfg.record_scopes.then_some(scope),
            });
            resamples += 1;
        };
        let tops = self.satisfied_tops(&f);
        let y_faces: Vec<Face> = tops.iter().map(|&i| self.x.tops()[i].clone()).collect();
        let remaining = match status {
            PruneStatus::Clean => BTreeMap::new(),
            PruneStatus::BudgetExhausted => self.violations(&f, cfg),
        };
        let (mut y, mut y_weights, mut unmeasurable) = (self.f_pruning(&f), None, None);
        if status == PruneStatus::Clean {
            if let Some(yy) = &y {
                match self.pruned_measure(&f, yy) {
                    Ok(w) => {
                        y = Some(yy.with_weights(&w)?);
                        y_weights = Some(w);
                    }
                    Err(PruneError::Unmeasurable(p)) => unmeasurable = Some(p),
                    Err(e) => return Err(e),
                }
            }
        }
        let y_faces = match &y {
            Some(yy) => yy.tops().to_vec(),
            None => y_faces,
        };
        Ok(PruneOutcome { status, resamples, labeling: f, transcript, y_faces, y_weights, unmeasurable, remaining, y })
    }

    /// Measure on `Y(d)`: draw an oriented top of `C_e`, then an oriented top of
    /// `Y` realizing that label pattern, proportionally to `ν_X` within the fiber.
    /// Returned in `Y.tops()` order.
    pub fn pruned_measure(&self, f: &Labeling, y: &PureComplex) -> Result<Vec<f64>, PruneError> {
        let d = self.x.dim();
        let pattern = |o: &[Vertex]| -> Vec<Elem> { o[1..].iter().map(|&v| self.dir(f, o[0], v)).collect() };
        let xw = |t: &Face| self.x.top_position(t).map(|i| self.x.weights()[i]).ok_or_else(|| PruneError::NotAFace(t.clone()));
        let mut fiber: HashMap<Vec<Elem>, f64> = HashMap::new();
        for t in y.tops() {
            let w = xw(t)?;
            for o in t.iter().copied().permutations(d + 1) {
                *fiber.entry(pattern(&o)).or_default() += w;
            }
        }
        let mut ce_prob: HashMap<Vec<Elem>, f64> = HashMap::new();
        let df = factorial(d);
        for (top, &w) in self.ce.tops().iter().zip(self.ce.weights()) {
            for o in top.iter().copied().permutations(d) {
                if !fiber.contains_key(&o) {
                    return Err(PruneError::Unmeasurable(o));
                }
                ce_prob.insert(o, w / df);
            }
        }
        y.tops()
            .iter()
            .map(|t| {
                let w = xw(t)?;
                let mut p = 0.0;
                for o in t.iter().copied().permutations(d + 1) {
                    let pat = pattern(&o);
                    let q = ce_prob.get(&pat).ok_or_else(|| PruneError::Unmeasurable(pat.clone()))?;
                    p += q * w / fiber[&pat];
                }
                Ok(p)
            })
            .collect()
    }

    /// Oriented edge masses of `G_∅`: class `f⃗(u,v) = s` carries `Prob_{C_e}[s]`,
    /// spread proportionally to `ν_X`.
    fn global_oriented_masses(&self, f: &Labeling) -> HashMap<(Vertex, Vertex), f64> {
        let mut class: HashMap<Elem, f64> = HashMap::new();
        let mut oriented = Vec::new();
        for e in self.x.faces(1) {
            let w = self.x.face_measure(e).expect("own face");
            for (a, b) in [(e[0], e[1]), (e[1], e[0])] {
                let s = self.dir(f, a, b);
                *class.entry(s).or_default() += w;
                oriented.push(((a, b), s, w));
            }
        }
        oriented
            .into_iter()
            .map(|(k, s, w)| (k, self.ce.face_measure(&[s]).unwrap_or(0.0) * w / class[&s]))
            .collect()
    }

    /// Worst ratio (either direction) between `Y_σ` and `G_σ` masses on the
    /// vertices and oriented edges of `Y_σ`. `y` must carry the pruned measure.
    pub fn measure_ratio_audit(&self, f: &Labeling, y: &PureComplex, sigma: &[Vertex]) -> Result<f64, PruneError> {
        let ys = y.link_skeleton(sigma)?;
        let (gv, ge): (HashMap<Vertex, f64>, HashMap<(Vertex, Vertex), f64>) = if sigma.is_empty() {
            let oriented = self.global_oriented_masses(f);
            let mut gv: HashMap<Vertex, f64> = HashMap::new();
            for (&(a, _), &w) in &oriented {
                *gv.entry(a).or_default() += w;
            }
            (gv, oriented)
        } else {
            let sg = self.satisfaction_graph(f, sigma)?;
            let g = &sg.graph;
            let gv = (0..g.n()).map(|i| (g.label(i), g.vertex_mass()[i])).collect();
            let ge = g
                .edge_weights_by_label()
                .into_iter()
                .flat_map(|(a, b, w)| [((a, b), w / 2.0), ((b, a), w / 2.0)])
                .collect();
            (gv, ge)
        };
        let ratio = |p: f64, q: Option<&f64>| -> f64 {
            match q {
                Some(&q) if q > 0.0 && p > 0.0 => (p / q).max(q / p),
                _ => f64::INFINITY,
            }
        };
        let mut worst: f64 = 1.0;
        for i in 0..ys.n() {
            worst = worst.max(ratio(ys.vertex_mass()[i], gv.get(&ys.label(i))));
        }
        for (a, b, w) in ys.edge_weights_by_label() {
            worst = worst.max(ratio(w / 2.0, ge.get(&(a, b))));
            worst = worst.max(ratio(w / 2.0, ge.get(&(b, a))));
        }
        Ok(worst)
    }

    /// Audit every face of `Y` up to dimension `d−2`, and the empty face.
    pub fn measure_ratio_audit_all(&self, f: &Labeling, y: &PureComplex) -> Result<f64, PruneError> {
        let mut faces: Vec<Face> = vec![Vec::new()];
        for l in 0..=y.dim() - 2 {
            faces.extend(y.faces(l).iter().cloned());
        }
        faces
            .par_iter()
            .map(|s| self.measure_ratio_audit(f, y, s))
            .try_reduce(|| 1.0, |a, b| Ok(a.max(b)))
    }
}

/// `label(v_i,v_j)·label(v_j,v_k) = label(v_i,v_k)` for all `i<j<k` of a sorted face.
pub fn triangle_condition(g: &GroupTable, face: &[Vertex], label: impl Fn(Vertex, Vertex) -> Elem) -> bool {
    let k = face.len();
    for i in 0..k {
        for j in i + 1..k {
            let a = label(face[i], face[j]);
            for l in j + 1..k {
                if g.mul(a, label(face[j], face[l])) != label(face[i], face[l]) {
                    return false;
                }
            }
        }
    }
    true
}

fn vertex_link_measure(x: &PureComplex, tau: &[Vertex]) -> Vec<(Vertex, f64)> {
    let cof = x.cofaces(tau).unwrap_or(&[]);
    let total: f64 = cof.iter().map(|&t| x.weights()[t as usize]).sum();
    let per = (x.dim() + 1 - tau.len()) as f64;
    let mut acc: BTreeMap<Vertex, f64> = BTreeMap::new();
    for &t in cof {
        for &u in &x.tops()[t as usize] {
            if !tau.contains(&u) {
                *acc.entry(u).or_default() += x.weights()[t as usize] / (total * per);
            }
        }
    }
    acc.into_iter().collect()
}

/// `|Y(ℓ)|/|X(ℓ)|` per level against the induction floor `(1/(2m^d))^{ℓ−1}`
/// (all edges survive; each level up keeps a `1/(2m^d)` share).
pub fn face_fractions(x: &PureComplex, y: &PureComplex, m: usize) -> Vec<FaceFraction> {
    let d = x.dim();
    (0..=d)
        .map(|l| {
            let (kept, total) = (y.faces(l).len(), x.faces(l).len());
            let fraction = kept as f64 / total as f64;
            let bound = (1.0 / (2.0 * (m as f64).powi(d as i32))).powi(l.saturating_sub(1) as i32);
            FaceFraction { level: l, kept, total, fraction, bound, ok: fraction >= bound }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn z5_fixture(n: usize) -> (PureComplex, GroupTable, GenSet) {
        let g = GroupTable::cyclic(5).unwrap();
        let s = GenSet::new(&g, &[1, 4, 2, 3]).unwrap();
        (PureComplex::complete(n, 2).unwrap(), g, s)
    }

    /// Labeling `f(ij) = h(j) − h(i)` in Z/5 (a coboundary into S when h is injective mod 5 on edges).
    fn coboundary(p: &Pruner, h: impl Fn(Vertex) -> Elem) -> Option<Labeling> {
        let gens = p
            .x
            .faces(1)
            .iter()
            .map(|e| p.s.index_of(p.g.mul(p.g.inv(h(e[0])), h(e[1]))).map(|i| i as u16))
            .collect::<Option<Vec<_>>>()?;
        Some(Labeling { gens })
    }

    #[test]
    fn z2_odd_triangle() {
        let x = PureComplex::complete(4, 2).unwrap();
        let g = GroupTable::cyclic(2).unwrap();
        assert!(!triangle_condition(&g, &[0, 1, 2], |_, _| 1));
        assert!(triangle_condition(&g, &[0, 1], |_, _| 1));
        assert!(triangle_condition(&g, &[0, 1, 2], |u, v| (u + v) % 2));
        // the Cayley complex of (Z/2, {1}) has no triangles
        let s = GenSet::new(&g, &[1]).unwrap();
        assert!(matches!(Pruner::new(&x, &g, &s), Err(PruneError::Group(GroupError::NotPure { .. }))));
        let g3 = GroupTable::cyclic(3).unwrap();
        let s3 = GenSet::new(&g3, &[1, 2]).unwrap();
        let p = Pruner::new(&x, &g3, &s3).unwrap();
        // f ≡ 1: triangle needs 1+1 = 1, false everywhere
        let f = Labeling { gens: vec![0; 6] };
        assert!(!p.is_satisfied(&f, &[0, 1, 2]).unwrap());
        assert!(p.is_satisfied(&f, &[0, 1]).unwrap());
        assert!(p.f_pruning(&f).is_none());
    }

    #[test]
    fn one_odd_triangle_removed() {
        // Z/3, S={1,2}, h(v)=v mod 3 is a coboundary on K_4 except where h collides
        let x = PureComplex::complete(4, 2).unwrap();
        let g = GroupTable::cyclic(3).unwrap();
        let s = GenSet::new(&g, &[1, 2]).unwrap();
        let p = Pruner::new(&x, &g, &s).unwrap();
        // labels f(ij) = j − i mod 3 on edges; f(03) would be 0, so set it to 1
        let gens: Vec<u16> = x
            .faces(1)
            .iter()
            .map(|e| match (e[1] - e[0]) % 3 {
                1 => 0,
                2 => 1,
                _ => 0,
            })
            .collect();
        let f = Labeling { gens };
        let kept: Vec<Face> = p.satisfied_tops(&f).into_iter().map(|i| x.tops()[i].clone()).collect();
        assert_eq!(kept, vec![vec![0, 1, 2], vec![1, 2, 3]]);
        for t in x.tops() {
            let a = p.label(&f, t[0], t[1]);
            let b = p.label(&f, t[1], t[2]);
            assert_eq!(kept.contains(t), (a + b) % 3 == p.label(&f, t[0], t[2]));
        }
    }

    #[test]
    fn coboundary_keeps_everything() {
        let (x, g, s) = z5_fixture(5);
        let p = Pruner::new(&x, &g, &s).unwrap();
        let f = coboundary(&p, |v| v as Elem).unwrap();
        let y = p.f_pruning(&f).unwrap();
        assert_eq!(y.tops().len(), x.tops().len());
        let sg = p.satisfaction_graph(&f, &[0]).unwrap();
        assert_eq!(sg.graph.n(), 4);
        assert_eq!(sg.graph.edges().len(), 6);
    }

    #[test]
    fn label_frequencies() {
        let x = PureComplex::complete(150, 1).unwrap();
        let g = GroupTable::cyclic(5).unwrap();
        let s = GenSet::new(&g, &[1, 4, 2, 3]).unwrap();
        // Pruner needs d >= 2; draw directly with the same recipe
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let gens: Vec<u16> = (0..x.faces(1).len()).map(|_| rng.gen_range(0..s.len() as u16)).collect();
        let n = gens.len() as f64;
        let sd = (n * 0.25 * 0.75).sqrt();
        for k in 0..4 {
            let c = gens.iter().filter(|&&l| l == k).count() as f64;
            assert!((c - n / 4.0).abs() < 3.0 * sd, "label {k}: {c}");
        }
    }

    #[test]
    fn sampling_is_seeded() {
        let (x, g, s) = z5_fixture(8);
        let p = Pruner::new(&x, &g, &s).unwrap();
        let a = p.sample_labeling(&mut ChaCha8Rng::seed_from_u64(9));
        let b = p.sample_labeling(&mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn bad_cover_matches_triangle_scan() {
        let (x, g, s) = z5_fixture(7);
        let p = Pruner::new(&x, &g, &s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let f = p.sample_labeling(&mut rng);
            for v in 0..7u32 {
                let mut prods = HashSet::new();
                for u in 0..7u32 {
                    for w in 0..7u32 {
                        if u != v && w != v && u != w {
                            let fd = |a: u32, b: u32| {
                                let l = s.get(f.gens[x.position(&[a.min(b), a.max(b)]).unwrap()] as usize);
                                if a < b {
                                    l
                                } else {
                                    (5 - l) % 5
                                }
                            };
                            prods.insert((fd(v, u) + fd(u, w) + fd(w, v)) % 5);
                        }
                    }
                }
                let expect = s.gens().iter().any(|g| !prods.contains(g));
                assert_eq!(p.bad_cover(&f, v), expect);
            }
        }
    }

    #[test]
    fn single_tuple_is_typical() {
        // m = 2 for Z/3: a coboundary makes every vertex see a biased split
        let x = PureComplex::complete(6, 2).unwrap();
        let g = GroupTable::cyclic(3).unwrap();
        let s = GenSet::new(&g, &[1, 2]).unwrap();
        let p = Pruner::new(&x, &g, &s).unwrap();
        let cfg = PruneConfig::literal(0.5);
        let f = Labeling { gens: vec![0; 15] };
        let dist = p.tuple_distribution(&f, &[0]);
        assert_eq!(dist.len(), 1);
        assert!((dist[&vec![0]] - 1.0).abs() < 1e-12);
        assert!(p.eval_event(&f, EventKind::At, &[0], &cfg).unwrap());
        assert!(p.eval_event(&f, EventKind::Bc, &[0, 1], &cfg).is_err());
    }

    #[test]
    fn satisfaction_partition_sizes() {
        let (x, g, s) = z5_fixture(40);
        let p = Pruner::new(&x, &g, &s).unwrap();
        let f = p.sample_labeling(&mut ChaCha8Rng::seed_from_u64(5));
        let sg = p.satisfaction_graph(&f, &[0]).unwrap();
        let mut by_color: BTreeMap<Elem, usize> = BTreeMap::new();
        for v in &sg.vertices {
            *by_color.entry(sg.coloring[v]).or_default() += 1;
        }
        let mut oracle: BTreeMap<Elem, usize> = BTreeMap::new();
        for v in 1..40u32 {
            let l = s.get(f.gens[x.position(&[0, v]).unwrap()] as usize);
            *oracle.entry(l).or_default() += 1;
        }
        assert_eq!(by_color, oracle);
        assert!((sg.graph.edges().iter().map(|e| e.2).sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn dependency_scope_small() {
        let (x, g, s) = z5_fixture(4);
        let p = Pruner::new(&x, &g, &s).unwrap();
        let sc = p.dependency_scope(&[0]).unwrap();
        assert_eq!(sc.edges.len(), 6);
        assert!(sc.neighbor_events as f64 <= sc.bound);
        // two disjoint tetrahedra: far events do not interact
        let mut tops = Vec::new();
        for base in [0u32, 10] {
            for t in (base..base + 4).combinations(3) {
                tops.push(t);
            }
        }
        let y = PureComplex::uniform(2, tops).unwrap();
        let p = Pruner::new(&y, &g, &s).unwrap();
        let sc = p.dependency_scope(&[0]).unwrap();
        assert_eq!(sc.edges.len(), 6);
        assert!(sc.edges.iter().all(|&e| y.faces(1)[e as usize].iter().all(|&v| v < 10)));
        assert_eq!(sc.neighbor_events, 4 + 6 - 1);
        let edge_scope = p.dependency_scope(&[0, 1]).unwrap();
        assert!(sc.edges.iter().all(|e| edge_scope.edges.contains(e)));
    }

    #[test]
    fn resample_touches_only_scope() {
        let (x, g, s) = z5_fixture(6);
        let p = Pruner::new(&x, &g, &s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f0 = p.sample_labeling(&mut rng);
        let mut f = f0.clone();
        let scope = vec![1, 4, 7];
        p.resample_scope(&mut f, &scope, &mut rng);
        for i in 0..f.gens.len() {
            if !scope.contains(&(i as u32)) {
                assert_eq!(f.gens[i], f0.gens[i]);
            }
        }
    }

    #[test]
    fn pruned_measure_normalized_and_unmeasurable() {
        let (x, g, s) = z5_fixture(5);
        let p = Pruner::new(&x, &g, &s).unwrap();
        let f = coboundary(&p, |v| v as Elem).unwrap();
        let y = p.f_pruning(&f).unwrap();
        let w = p.pruned_measure(&f, &y).unwrap();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // coboundary on a uniform complex: Y_σ and G_σ coincide
        let y = y.with_weights(&w).unwrap();
        assert!((p.measure_ratio_audit_all(&f, &y).unwrap() - 1.0).abs() < 1e-9);
        // a single triangle cannot realize all 12 oriented patterns
        let one = x.restrict(|i| i == 0).unwrap();
        assert!(matches!(p.pruned_measure(&f, &one), Err(PruneError::Unmeasurable(_))));
    }

    #[test]
    fn literal_thresholds_exhaust_budget() {
        let (x, g, s) = z5_fixture(30);
        let p = Pruner::new(&x, &g, &s).unwrap();
        let cfg = PruneConfig { max_resamples: 20, ..PruneConfig::literal(0.95) };
        let out = p.moser_tardos(&cfg, &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(out.status, PruneStatus::BudgetExhausted);
        assert_eq!(out.resamples, 20);
        assert!(!out.remaining.is_empty());
    }

    #[test]
    fn empirical_run_is_clean_and_replayable() {
        let (x, g, s) = z5_fixture(30);
        let p = Pruner::new(&x, &g, &s).unwrap();
        let cfg = PruneConfig::empirical(0.95);
        let a = p.moser_tardos(&cfg, &mut ChaCha8Rng::seed_from_u64(11));
        let b = p.moser_tardos(&cfg, &mut ChaCha8Rng::seed_from_u64(11));
        assert_eq!(a.transcript, b.transcript);
        assert_eq!(a.labeling, b.labeling);
        if a.status == PruneStatus::Clean {
            assert!(p.first_violated(&a.labeling, &cfg).is_none());
            let w = a.y_weights.as_ref().expect("measurable");
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}
