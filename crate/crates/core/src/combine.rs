//! Prune `X` to a subcomplex with a non-degenerate coloring into a fixed complex `C`.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{ComplexError, Face, PureComplex, Vertex};
use crate::pruning::{face_fractions, FaceFraction};
use crate::spectral::{adjacency_spectrum, coloring_measure, is_hdx, HdxMode, WGraph};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CombineError {
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error("dimensions differ: X has {x}, C has {c}")]
    DimMismatch { x: usize, c: usize },
    #[error("combining needs dimension >= 2, got {0}")]
    DimTooSmall(usize),
    #[error("{0:?} is not a face")]
    NotAFace(Face),
    #[error("{kind:?} is not defined at {face:?}")]
    BadKindForFace { kind: CombineEventKind, face: Face },
    #[error("coloring has {got} entries, complex has {expected} vertices")]
    WrongLength { got: usize, expected: usize },
    #[error("{0} is not a vertex of the target")]
    BadColor(Vertex),
}

/// Colors of `X(0)` in `X.vertices()` order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexColoring {
    pub colors: Vec<Vertex>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum CombineEventKind {
    Ac,
    Ne,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CombineEvent {
    pub kind: CombineEventKind,
    pub face: Face,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombineConfig {
    /// NE fires when a satisfaction graph's two-sided λ exceeds this.
    pub lambda: f64,
    pub max_resamples: usize,
    pub record_scopes: bool,
}

impl CombineConfig {
    pub fn new(lambda: f64) -> Self {
        CombineConfig { lambda, max_resamples: 10_000, record_scopes: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CombineStatus {
    Clean,
    BudgetExhausted,
    /// clean events but the coloring misses a face of `C`
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombineStep {
    pub iteration: usize,
    pub event: CombineEvent,
    pub scope_len: usize,
    pub changed: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scope: Option<Vec<Vertex>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CombineOutcome {
    pub status: CombineStatus,
    pub resamples: usize,
    pub coloring: VertexColoring,
    pub transcript: Vec<CombineStep>,
    pub y_faces: Vec<Face>,
    /// coloring measure on `y_faces`, when the coloring is non-degenerate
    pub y_weights: Option<Vec<f64>>,
    /// a top face of `C` with no preimage
    pub missing: Option<Face>,
    pub remaining: BTreeMap<CombineEventKind, usize>,
    #[serde(skip)]
    pub y: Option<PureComplex>,
}

pub struct Combiner<'a> {
    pub x: &'a PureComplex,
    pub c: &'a PureComplex,
    rank: HashMap<Vertex, usize>,
    palette: Vec<Vertex>,
    link_verts: HashMap<Face, Vec<Vertex>>,
    link_skel: HashMap<Face, WGraph>,
    events: Vec<CombineEvent>,
}

impl<'a> Combiner<'a> {
    pub fn new(x: &'a PureComplex, c: &'a PureComplex) -> Result<Self, CombineError> {
        let d = x.dim();
        if c.dim() != d {
            return Err(CombineError::DimMismatch { x: d, c: c.dim() });
        }
        if d < 2 {
            return Err(CombineError::DimTooSmall(d));
        }
        let rank = x.vertices().into_iter().enumerate().map(|(i, v)| (v, i)).collect();
        let mut link_verts = HashMap::new();
        let mut link_skel = HashMap::new();
        let mut events = Vec::new();
        for l in 0..d {
            for tau in x.faces(l) {
                let mut lv: BTreeSet<Vertex> = BTreeSet::new();
                for &t in x.cofaces(tau).unwrap_or(&[]) {
                    lv.extend(x.tops()[t as usize].iter().filter(|v| !tau.contains(v)));
                }
                link_verts.insert(tau.clone(), lv.into_iter().collect());
                events.push(CombineEvent { kind: CombineEventKind::Ac, face: tau.clone() });
                if l + 2 <= d {
                    link_skel.insert(tau.clone(), x.link_skeleton(tau)?);
                    events.push(CombineEvent { kind: CombineEventKind::Ne, face: tau.clone() });
                }
            }
        }
        events.sort();
        Ok(Combiner { x, c, rank, palette: c.vertices(), link_verts, link_skel, events })
    }

    pub fn events(&self) -> &[CombineEvent] {
        &self.events
    }

    pub fn color(&self, f: &VertexColoring, v: Vertex) -> Vertex {
        f.colors[self.rank[&v]]
    }

    pub fn sample_coloring(&self, rng: &mut impl Rng) -> VertexColoring {
        let k = self.palette.len();
        VertexColoring { colors: (0..self.rank.len()).map(|_| self.palette[rng.gen_range(0..k)]).collect() }
    }

    pub fn check_coloring(&self, f: &VertexColoring) -> Result<(), CombineError> {
        if f.colors.len() != self.rank.len() {
            return Err(CombineError::WrongLength { got: f.colors.len(), expected: self.rank.len() });
        }
        match f.colors.iter().find(|c| self.palette.binary_search(c).is_err()) {
            Some(&c) => Err(CombineError::BadColor(c)),
            None => Ok(()),
        }
    }

    fn image(&self, f: &VertexColoring, face: &[Vertex]) -> Face {
        let mut im: Face = face.iter().map(|&v| self.color(f, v)).collect();
        im.sort_unstable();
        im
    }

    /// The image has `ℓ+1` distinct colors forming a face of `C`.
    pub fn c_satisfied(&self, f: &VertexColoring, face: &[Vertex]) -> Result<bool, CombineError> {
        let face = crate::complex::canonical(face)?;
        if !self.x.contains(&face) {
            return Err(CombineError::NotAFace(face));
        }
        Ok(self.satisfied_unchecked(f, &face))
    }

    fn satisfied_unchecked(&self, f: &VertexColoring, face: &[Vertex]) -> bool {
        let im = self.image(f, face);
        im.windows(2).all(|w| w[0] != w[1]) && (im.is_empty() || self.c.contains(&im))
    }

    pub fn satisfied_tops(&self, f: &VertexColoring) -> Vec<usize> {
        (0..self.x.tops().len()).into_par_iter().filter(|&i| self.satisfied_unchecked(f, &self.x.tops()[i])).collect()
    }

    /// `Y` with the coloring measure: draw `s ∈ C(d)`, then `t ∈ Y(d)` with
    /// `f(t) = s` proportionally to `ν_X`. Falls back to the restricted `X`
    /// measure, with the witness, when some `s` has no preimage.
    pub fn c_pruning(&self, f: &VertexColoring) -> (Option<PureComplex>, Option<Face>) {
        let tops = self.satisfied_tops(f);
        let mut fiber: HashMap<Face, f64> = HashMap::new();
        for &i in &tops {
            *fiber.entry(self.image(f, &self.x.tops()[i])).or_default() += self.x.weights()[i];
        }
        let missing = self.c.tops().iter().find(|s| !fiber.contains_key(*s)).cloned();
        let faces: Vec<(Face, f64)> = tops
            .iter()
            .map(|&i| {
                let t = &self.x.tops()[i];
                let w = self.x.weights()[i];
                let w = match missing {
                    Some(_) => w,
                    None => {
                        let im = self.image(f, t);
                        let cw = self.c.weights()[self.c.top_position(&im).expect("satisfied")];
                        cw * w / fiber[&im]
                    }
                };
                (t.clone(), w)
            })
            .collect();
        if faces.is_empty() {
            return (None, missing);
        }
        (Some(PureComplex::build(self.x.dim(), faces).expect("subcomplex of X")), missing)
    }

    /// `G_σ` with the coloring measure against `C_{f(σ)}`; `None` if degenerate.
    pub fn satisfaction_graph(&self, f: &VertexColoring, sigma: &[Vertex]) -> Option<WGraph> {
        let skel = self.link_skel.get(sigma)?;
        let a = self.image(f, sigma);
        let target = self.c.link_skeleton(&a).ok()?;
        let with = |extra: &[Vertex]| {
            let mut ext = sigma.to_vec();
            ext.extend_from_slice(extra);
            ext.sort_unstable();
            self.satisfied_unchecked(f, &ext)
        };
        let nverts = skel.labels().iter().filter(|&&v| with(&[v])).count();
        let edges: Vec<(Vertex, Vertex, f64)> =
            skel.edge_weights_by_label().into_iter().filter(|&(u, v, _)| with(&[u, v])).collect();
        if edges.is_empty() {
            return None;
        }
        let raw = WGraph::from_edges(&edges).ok()?;
        if raw.n() != nverts {
            return None;
        }
        let psi: HashMap<Vertex, Vertex> = raw.labels().iter().map(|&v| (v, self.color(f, v))).collect();
        coloring_measure(&raw, &target, &psi).ok()
    }

    fn check_kind(&self, kind: CombineEventKind, tau: &[Vertex]) -> Result<(), CombineError> {
        let d = self.x.dim();
        let ok = !tau.is_empty()
            && self.x.contains(tau)
            && match kind {
                CombineEventKind::Ac => tau.len() <= d,
                CombineEventKind::Ne => tau.len() < d,
            };
        if ok {
            Ok(())
        } else {
            Err(CombineError::BadKindForFace { kind, face: tau.to_vec() })
        }
    }

    pub fn eval_event(&self, f: &VertexColoring, kind: CombineEventKind, tau: &[Vertex], lambda: f64) -> Result<bool, CombineError> {
        let tau = crate::complex::canonical(tau)?;
        self.check_kind(kind, &tau)?;
        Ok(self.eval_unchecked(f, &CombineEvent { kind, face: tau }, lambda))
    }

    /// A color of `C_{f(τ)}(0)` absent from `f(X_τ(0))`.
    pub fn missing_color(&self, f: &VertexColoring, tau: &[Vertex]) -> Option<Vertex> {
        if !self.satisfied_unchecked(f, tau) {
            return None;
        }
        let a = self.image(f, tau);
        let want = self.c.link(&a).ok()?.vertices();
        let seen: BTreeSet<Vertex> = self.link_verts[tau].iter().map(|&u| self.color(f, u)).collect();
        want.into_iter().find(|b| !seen.contains(b))
    }

    fn eval_unchecked(&self, f: &VertexColoring, ev: &CombineEvent, lambda: f64) -> bool {
        match ev.kind {
            CombineEventKind::Ac => self.missing_color(f, &ev.face).is_some(),
            CombineEventKind::Ne => {
                self.satisfied_unchecked(f, &ev.face)
                    && self.satisfaction_graph(f, &ev.face).is_none_or(|g| adjacency_spectrum(&g).two_sided > lambda)
            }
        }
    }

    /// `τ ∪ X_τ(0)`, sorted.
    pub fn scope(&self, tau: &[Vertex]) -> Vec<Vertex> {
        let mut s: Vec<Vertex> = tau.iter().chain(&self.link_verts[tau]).copied().collect();
        s.sort_unstable();
        s
    }

    pub fn first_violated(&self, f: &VertexColoring, lambda: f64) -> Option<&CombineEvent> {
        self.events.par_iter().find_first(|ev| self.eval_unchecked(f, ev, lambda))
    }

    pub fn violations(&self, f: &VertexColoring, lambda: f64) -> BTreeMap<CombineEventKind, usize> {
        let mut out = BTreeMap::new();
        let hits: Vec<CombineEventKind> =
            self.events.par_iter().filter(|ev| self.eval_unchecked(f, ev, lambda)).map(|ev| ev.kind).collect();
        for k in hits {
            *out.entry(k).or_default() += 1;
        }
        out
    }

    pub fn moser_tardos(&self, cfg: &CombineConfig, rng: &mut impl Rng) -> CombineOutcome {
        let f = self.sample_coloring(rng);
        self.moser_tardos_from(f, cfg, rng).expect("sampled colorings are valid")
    }

    pub fn moser_tardos_from(&self, mut f: VertexColoring, cfg: &CombineConfig, rng: &mut impl Rng) -> Result<CombineOutcome, CombineError> {
        self.check_coloring(&f)?;
        let k = self.palette.len();
        let mut transcript = Vec::new();
        let mut resamples = 0;
        let mut status = loop {
            let Some(ev) = self.first_violated(&f, cfg.lambda) else { break CombineStatus::Clean };
            if resamples >= cfg.max_resamples {
                break CombineStatus::BudgetExhausted;
            }
            let scope = self.scope(&ev.face);
            let mut changed = 0;
            for &v in &scope {
                let new = self.palette[rng.gen_range(0..k)];
                let slot = &mut f.colors[self.rank[&v]];
                changed += usize::from(*slot != new);
                *slot = new;
            }
            transcript.push(CombineStep {
                iteration: resamples,
                event: ev.clone(),
                scope_len: scope.len(),
                changed,
                scope: cfg.record_scopes.then_some(scope),
            });
            resamples += 1;
        };
        let remaining = match status {
            CombineStatus::Clean => BTreeMap::new(),
            _ => self.violations(&f, cfg.lambda),
        };
        let (y, missing) = self.c_pruning(&f);
        if status == CombineStatus::Clean && (missing.is_some() || y.is_none()) {
            status = CombineStatus::Fail;
        }
        let y_faces = y.as_ref().map_or_else(Vec::new, |y| y.tops().to_vec());
        let y_weights = match (&y, &missing) {
            (Some(y), None) => Some(y.weights().to_vec()),
            _ => None,
        };
        Ok(CombineOutcome { status, resamples, coloring: f, transcript, y_faces, y_weights, missing, remaining, y })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PathArgument {
    pub unsatisfied_edges: usize,
    pub routed: usize,
    pub failures: Vec<(Vertex, Vertex)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CombineReport {
    pub homomorphism: bool,
    pub bad_face: Option<Face>,
    pub non_degenerate: bool,
    pub missing: Option<Face>,
    pub hdx_threshold: f64,
    /// the tighter `2λ/(1−λ)` reading, reported only
    pub hdx_threshold_tight: f64,
    pub worst_lambda: f64,
    pub hdx: bool,
    pub hdx_tight: bool,
    pub connected: bool,
    pub path_argument: PathArgument,
    pub face_fractions: Vec<FaceFraction>,
    pub fractions_positive: bool,
    pub pass: bool,
}

/// Graph distance between colors in `C`'s 1-skeleton.
fn color_distances(c: &PureComplex) -> HashMap<(Vertex, Vertex), usize> {
    let mut adj: HashMap<Vertex, Vec<Vertex>> = HashMap::new();
    for e in c.faces(1) {
        adj.entry(e[0]).or_default().push(e[1]);
        adj.entry(e[1]).or_default().push(e[0]);
    }
    let mut dist = HashMap::new();
    for s in c.vertices() {
        let mut q = VecDeque::from([(s, 0)]);
        dist.insert((s, s), 0);
        while let Some((u, k)) = q.pop_front() {
            for &w in adj.get(&u).map_or(&[][..], |v| v) {
                if let std::collections::hash_map::Entry::Vacant(e) = dist.entry((s, w)) {
                    e.insert(k + 1);
                    q.push_back((w, k + 1));
                }
            }
        }
    }
    dist
}

/// Exhaustive audit of a clean combine outcome.
pub fn verify_combine(cb: &Combiner, f: &VertexColoring, y: &PureComplex, lambda: f64) -> CombineReport {
    let (x, c) = (cb.x, cb.c);
    let bad_face = (0..=y.dim())
        .flat_map(|k| y.faces(k).iter())
        .find(|s| !cb.satisfied_unchecked(f, s))
        .cloned();
    let images: BTreeSet<Face> = y.tops().iter().map(|t| cb.image(f, t)).collect();
    let missing = c.tops().iter().find(|s| !images.contains(*s)).cloned();

    let hdx_threshold = 2.0 * lambda / (1.0 - 2.0 * lambda);
    let hdx_threshold_tight = 2.0 * lambda / (1.0 - lambda);
    let rep = is_hdx(y, hdx_threshold, HdxMode::TwoSided);
    let worst_lambda = rep.worst.as_ref().map_or(0.0, |w| w.value);

    let connected = y.one_skeleton().map(|g| g.is_connected() && g.n() == x.num_vertices()).unwrap_or(false);
    let path_argument = route_unsatisfied_edges(cb, f, y);

    let m = c.num_vertices();
    let face_fractions = face_fractions(x, y, m);
    let fractions_positive = face_fractions.iter().all(|ff| ff.kept > 0);
    let pass = bad_face.is_none()
        && missing.is_none()
        && rep.pass
        && connected
        && path_argument.failures.is_empty()
        && fractions_positive;
    CombineReport {
        homomorphism: bad_face.is_none(),
        bad_face,
        non_degenerate: missing.is_none(),
        missing,
        hdx_threshold,
        hdx_threshold_tight,
        worst_lambda,
        hdx: rep.pass,
        hdx_tight: worst_lambda <= hdx_threshold_tight,
        connected,
        path_argument,
        face_fractions,
        fractions_positive,
        pass,
    }
}

/// For each `X` edge `vw` missing from `Y`, walk from `v` through `Y` edges to
/// neighbours of `w` whose color is strictly closer to `f(w)` in `C`, until the
/// last step `u w` is itself a `Y` edge.
fn route_unsatisfied_edges(cb: &Combiner, f: &VertexColoring, y: &PureComplex) -> PathArgument {
    let x = cb.x;
    let dist = color_distances(cb.c);
    let yedges: BTreeSet<&Face> = y.faces(1).iter().collect();
    let in_y = |a: Vertex, b: Vertex| yedges.contains(&vec![a.min(b), a.max(b)]);
    let in_x = |a: Vertex, b: Vertex| x.contains(&[a.min(b), a.max(b)]);
    let mut yadj: HashMap<Vertex, Vec<Vertex>> = HashMap::new();
    for e in y.faces(1) {
        yadj.entry(e[0]).or_default().push(e[1]);
        yadj.entry(e[1]).or_default().push(e[0]);
    }
    let d = |a: Vertex, b: Vertex| dist.get(&(cb.color(f, a), cb.color(f, b))).copied().unwrap_or(usize::MAX);
    let missing: Vec<&Face> = x.faces(1).iter().filter(|e| !in_y(e[0], e[1])).collect();
    let failures: Vec<(Vertex, Vertex)> = missing
        .par_iter()
        .filter_map(|e| {
            let (v, w) = (e[0], e[1]);
            let mut cur = v;
            for _ in 0..=x.num_vertices() {
                if in_y(cur, w) {
                    return None;
                }
                let k = d(cur, w);
                let goal = if k <= 1 { 1 } else { k - 1 };
                let next = yadj.get(&cur).and_then(|nb| nb.iter().copied().find(|&u| in_x(u, w) && d(u, w) == goal));
                match next {
                    Some(u) if u != cur => cur = u,
                    _ => return Some((v, w)),
                }
            }
            Some((v, w))
        })
        .collect();
    PathArgument { unsatisfied_edges: missing.len(), routed: missing.len() - failures.len(), failures }
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn satisfaction_by_membership() {
        let x = PureComplex::complete(6, 2).unwrap();
        let c = PureComplex::uniform(2, vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3]]).unwrap();
        let cb = Combiner::new(&x, &c).unwrap();
        let f = VertexColoring { colors: vec![1, 2, 3, 0, 0, 0] };
        assert!(!cb.c_satisfied(&f, &[0, 1, 2]).unwrap()); // {1,2,3} missing from C
        assert!(cb.c_satisfied(&f, &[0, 1, 3]).unwrap());
        assert!(!cb.c_satisfied(&f, &[3, 4]).unwrap()); // repeated color
        assert!(cb.c_satisfied(&f, &[0, 1]).unwrap());
    }

    #[test]
    fn injective_and_constant_extremes() {
        let x = PureComplex::complete(6, 2).unwrap();
        let c = PureComplex::complete(6, 2).unwrap();
        let cb = Combiner::new(&x, &c).unwrap();
        let id = VertexColoring { colors: (0..6).collect() };
        let (y, miss) = cb.c_pruning(&id);
        assert!(miss.is_none());
        assert_eq!(y.unwrap().tops().len(), x.tops().len());
        let k = VertexColoring { colors: vec![2; 6] };
        assert!(cb.c_pruning(&k).0.is_none());
    }

    #[test]
    fn satisfied_count_matches_enumeration() {
        let x = PureComplex::complete(20, 2).unwrap();
        let c = PureComplex::complete(5, 2).unwrap();
        let cb = Combiner::new(&x, &c).unwrap();
        let f = cb.sample_coloring(&mut ChaCha8Rng::seed_from_u64(4));
        let oracle = (0..20usize)
            .combinations(3)
            .filter(|t| t.iter().map(|&i| f.colors[i]).collect::<BTreeSet<_>>().len() == 3)
            .count();
        assert_eq!(cb.satisfied_tops(&f).len(), oracle);
    }

    #[test]
    fn missing_color_witness() {
        let x = PureComplex::complete(6, 2).unwrap();
        let c = PureComplex::complete(5, 2).unwrap();
        let cb = Combiner::new(&x, &c).unwrap();
        // vertex 0 colored 0; neighbours use colors 1,2 only
        let f = VertexColoring { colors: vec![0, 1, 2, 1, 2, 1] };
        assert_eq!(cb.missing_color(&f, &[0]), Some(3));
        assert!(cb.eval_event(&f, CombineEventKind::Ac, &[0], 0.5).unwrap());
        let g = VertexColoring { colors: vec![0, 1, 2, 3, 4, 1] };
        assert_eq!(cb.missing_color(&g, &[0]), None);
    }

    #[test]
    fn disconnected_satisfaction_graph_is_ne() {
        // the link of 0 in C is the path 1-2, 3-4 split in two triangles
        let x = PureComplex::complete(7, 2).unwrap();
        let c = PureComplex::uniform(2, vec![vec![0, 1, 2], vec![0, 3, 4]]).unwrap();
        let cb = Combiner::new(&x, &c).unwrap();
        let f = VertexColoring { colors: vec![0, 1, 2, 3, 4, 1, 3] };
        assert!(cb.eval_event(&f, CombineEventKind::Ne, &[0], 0.99).unwrap());
    }

    #[test]
    fn fixture_runs_clean_and_verifies() {
        let x = PureComplex::complete(40, 2).unwrap();
        let c = PureComplex::complete(5, 2).unwrap();
        let cb = Combiner::new(&x, &c).unwrap();
        let cfg = CombineConfig::new(0.35);
        let a = cb.moser_tardos(&cfg, &mut ChaCha8Rng::seed_from_u64(1));
        let b = cb.moser_tardos(&cfg, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(a.transcript, b.transcript);
        assert_eq!(a.status, CombineStatus::Clean);
        let y = a.y.as_ref().unwrap();
        let rep = verify_combine(&cb, &a.coloring, y, cfg.lambda);
        assert!(rep.pass, "{rep:?}");
        assert!((y.weights().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        // Y's link skeletons equal the satisfaction graphs as sets
        for v in 0..40u32 {
            let ys = y.link_skeleton(&[v]).unwrap();
            let gs = cb.satisfaction_graph(&a.coloring, &[v]).unwrap();
            assert_eq!(ys.labels(), gs.labels());
            assert_eq!(ys.edges().len(), gs.edges().len());
        }
    }

    #[test]
    fn missing_preimage_fails_non_degeneracy() {
        let x = PureComplex::complete(6, 2).unwrap();
        let c = PureComplex::complete(4, 2).unwrap();
        let cb = Combiner::new(&x, &c).unwrap();
        let f = VertexColoring { colors: vec![0, 1, 2, 3, 0, 1] };
        let (y, _) = cb.c_pruning(&f);
        let y = y.unwrap();
        let keep: Vec<usize> =
            (0..y.tops().len()).filter(|&i| cb.image(&f, &y.tops()[i]) != vec![1, 2, 3]).collect();
        let y2 = y.restrict(|i| keep.contains(&i)).unwrap();
        let rep = verify_combine(&cb, &f, &y2, 0.3);
        assert!(!rep.non_degenerate);
        assert_eq!(rep.missing, Some(vec![1, 2, 3]));
    }

    #[test]
    fn identity_coloring_matches_plain_hdx() {
        let x = PureComplex::complete(6, 2).unwrap();
        let cb = Combiner::new(&x, &x).unwrap();
        let f = VertexColoring { colors: (0..6).collect() };
        let y = cb.c_pruning(&f).0.unwrap();
        let rep = verify_combine(&cb, &f, &y, 0.3);
        let direct = is_hdx(&x, rep.hdx_threshold, HdxMode::TwoSided);
        assert!((rep.worst_lambda - direct.worst.unwrap().value).abs() < 1e-12);
    }
}
