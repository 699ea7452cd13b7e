//! Pure weighted simplicial complexes: measures, links, skeletons, tensoring.

use std::collections::{BTreeSet, HashMap};

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spectral::{self, HdxMode, WGraph};

pub type Vertex = u32;
/// A face: strictly increasing vertex ids.
pub type Face = Vec<Vertex>;

/// Absolute tolerance for measure comparisons.
pub const MEASURE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComplexError {
    #[error("face {face:?} has {got} vertices, expected {expected}")]
    NonPure { face: Vec<Vertex>, got: usize, expected: usize },
    #[error("total top-face weight is zero")]
    ZeroMeasure,
    #[error("top face {0:?} has non-positive or non-finite weight")]
    BadWeight(Face),
    #[error("duplicate face {0:?}")]
    DuplicateFace(Face),
    #[error("face {0:?} repeats a vertex")]
    RepeatedVertex(Vec<Vertex>),
    #[error("{0:?} is not a face of the complex")]
    NotAFace(Face),
    #[error("{0:?} is a top face; its link is empty")]
    TopFace(Face),
    #[error("level {level} out of range for face of dimension {face_dim} in a {dim}-complex")]
    BadLevel { level: usize, face_dim: isize, dim: usize },
    #[error("tensor needs t >= d+1 = {need}, got {t}")]
    TooSmallT { t: usize, need: usize },
    #[error("operation needs dimension >= {need}, complex has {dim}")]
    DimTooSmall { dim: usize, need: usize },
    #[error("weights length {got} does not match {expected} faces")]
    WeightLen { got: usize, expected: usize },
}

#[derive(Clone, Debug)]
struct Entry {
    level: usize,
    pos: usize,
    cofaces: Vec<u32>,
}

/// A pure `d`-dimensional complex with a probability measure on its top faces.
#[derive(Clone, Debug)]
pub struct PureComplex {
    dim: usize,
    tops: Vec<Face>,
    weights: Vec<f64>,
    levels: Vec<Vec<Face>>,
    index: HashMap<Face, Entry>,
}

pub fn canonical(face: &[Vertex]) -> Result<Face, ComplexError> {
    let mut f = face.to_vec();
    f.sort_unstable();
    if f.windows(2).any(|w| w[0] == w[1]) {
        return Err(ComplexError::RepeatedVertex(face.to_vec()));
    }
    Ok(f)
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |a, i| a * i as f64)
}

impl PureComplex {
    pub fn build(dim: usize, faces: Vec<(Face, f64)>) -> Result<Self, ComplexError> {
        let mut seen = HashMap::with_capacity(faces.len());
        let mut tops = Vec::with_capacity(faces.len());
        let mut raw = Vec::with_capacity(faces.len());
        for (f, w) in faces {
            if f.len() != dim + 1 {
                return Err(ComplexError::NonPure { got: f.len(), expected: dim + 1, face: f });
            }
            let f = canonical(&f)?;
            if !(w.is_finite() && w >= 0.0) {
                return Err(ComplexError::BadWeight(f));
            }
            if seen.insert(f.clone(), ()).is_some() {
                return Err(ComplexError::DuplicateFace(f));
            }
            tops.push(f);
            raw.push(w);
        }
        let total: f64 = raw.iter().sum();
        if tops.is_empty() || total <= 0.0 {
            return Err(ComplexError::ZeroMeasure);
        }
        if let Some(i) = raw.iter().position(|&w| w <= 0.0) {
            return Err(ComplexError::BadWeight(tops[i].clone()));
        }
        // sort tops so that face order is canonical regardless of input order
        let mut order: Vec<usize> = (0..tops.len()).collect();
        order.sort_by(|&a, &b| tops[a].cmp(&tops[b]));
        let tops: Vec<Face> = order.iter().map(|&i| tops[i].clone()).collect();
        let weights: Vec<f64> = order.iter().map(|&i| raw[i] / total).collect();
        Ok(Self::assemble(dim, tops, weights))
    }

    pub fn uniform(dim: usize, faces: Vec<Face>) -> Result<Self, ComplexError> {
        Self::build(dim, faces.into_iter().map(|f| (f, 1.0)).collect())
    }

    /// Complete `d`-complex on vertices `0..n`, uniform.
    pub fn complete(n: usize, d: usize) -> Result<Self, ComplexError> {
        let faces = (0..n as Vertex).combinations(d + 1).collect();
        Self::uniform(d, faces)
    }

    fn assemble(dim: usize, tops: Vec<Face>, weights: Vec<f64>) -> Self {
        let mut cof: HashMap<Face, Vec<u32>> = HashMap::new();
        for (ti, t) in tops.iter().enumerate() {
            for k in 1..=t.len() {
                for sub in t.iter().copied().combinations(k) {
                    cof.entry(sub).or_default().push(ti as u32);
                }
            }
        }
        let mut levels: Vec<Vec<Face>> = vec![Vec::new(); dim + 1];
        for f in cof.keys() {
            levels[f.len() - 1].push(f.clone());
        }
        for l in &mut levels {
            l.sort_unstable();
        }
        let mut index = HashMap::with_capacity(cof.len());
        for (k, l) in levels.iter().enumerate() {
            for (pos, f) in l.iter().enumerate() {
                let cofaces = cof.remove(f).unwrap_or_default();
                index.insert(f.clone(), Entry { level: k, pos, cofaces });
            }
        }
        PureComplex { dim, tops, weights, levels, index }
    }

    /// Same top faces, new (renormalized) weights.
    pub fn with_weights(&self, weights: &[f64]) -> Result<Self, ComplexError> {
        if weights.len() != self.tops.len() {
            return Err(ComplexError::WeightLen { got: weights.len(), expected: self.tops.len() });
        }
        Self::build(self.dim, self.tops.iter().cloned().zip(weights.iter().copied()).collect())
    }

    /// Sub-complex spanned by the selected top faces, weights inherited and renormalized.
    pub fn restrict(&self, keep: impl Fn(usize) -> bool) -> Option<Self> {
        let faces: Vec<(Face, f64)> = (0..self.tops.len())
            .filter(|&i| keep(i))
            .map(|i| (self.tops[i].clone(), self.weights[i]))
            .collect();
        Self::build(self.dim, faces).ok()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn tops(&self) -> &[Face] {
        &self.tops
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    /// `X(k)` in lexicographic order.
    pub fn faces(&self, k: usize) -> &[Face] {
        self.levels.get(k).map(|v| v.as_slice()).unwrap_or(&[])
    }
    pub fn vertices(&self) -> Vec<Vertex> {
        self.faces(0).iter().map(|f| f[0]).collect()
    }
    pub fn num_vertices(&self) -> usize {
        self.faces(0).len()
    }
    pub fn contains(&self, face: &[Vertex]) -> bool {
        face.is_empty() || self.index.contains_key(face)
    }
    /// Position of a (sorted) face within its level.
    pub fn position(&self, face: &[Vertex]) -> Option<usize> {
        self.index.get(face).map(|e| e.pos)
    }
    /// Indices of top faces containing the (sorted) face.
    pub fn cofaces(&self, face: &[Vertex]) -> Option<&[u32]> {
        self.index.get(face).map(|e| e.cofaces.as_slice())
    }
    pub fn top_position(&self, face: &[Vertex]) -> Option<usize> {
        self.index.get(face).filter(|e| e.level == self.dim).map(|e| e.pos)
    }

    /// Prob{s}: the measure of an unordered face at its own level.
    pub fn face_measure(&self, s: &[Vertex]) -> Result<f64, ComplexError> {
        if s.is_empty() {
            return Ok(1.0);
        }
        let s = canonical(s)?;
        let e = self.index.get(&s).ok_or_else(|| ComplexError::NotAFace(s.clone()))?;
        let sum: f64 = e.cofaces.iter().map(|&t| self.weights[t as usize]).sum();
        Ok(sum / binomial(self.dim + 1, s.len()))
    }

    /// Prob of an oriented face: Prob{s}/(k+1)!.
    pub fn oriented_measure(&self, s: &[Vertex]) -> Result<f64, ComplexError> {
        Ok(self.face_measure(s)? / factorial(s.len()))
    }

    pub fn degree(&self, s: &[Vertex], level: usize) -> Result<usize, ComplexError> {
        let s = canonical(s)?;
        let fd = s.len() as isize - 1;
        if level > self.dim || (level as isize) < fd {
            return Err(ComplexError::BadLevel { level, face_dim: fd, dim: self.dim });
        }
        if !self.contains(&s) {
            return Err(ComplexError::NotAFace(s));
        }
        if s.is_empty() {
            return Ok(self.faces(level).len());
        }
        let mut found = BTreeSet::new();
        for &t in &self.index[&s].cofaces {
            let rest: Vec<Vertex> =
                self.tops[t as usize].iter().copied().filter(|v| !s.contains(v)).collect();
            for extra in rest.into_iter().combinations(level + 1 - s.len()) {
                let mut f = s.clone();
                f.extend(extra);
                f.sort_unstable();
                found.insert(f);
            }
        }
        Ok(found.len())
    }

    /// Q = max over vertices of the number of top faces containing it.
    pub fn max_degree(&self) -> usize {
        self.faces(0).iter().map(|v| self.index[v].cofaces.len()).max().unwrap_or(0)
    }

    /// The link `X_s` with its conditional measure.
    pub fn link(&self, s: &[Vertex]) -> Result<Self, ComplexError> {
        if s.is_empty() {
            return Ok(self.clone());
        }
        let s = canonical(s)?;
        let e = self.index.get(&s).ok_or_else(|| ComplexError::NotAFace(s.clone()))?;
        if e.level == self.dim {
            return Err(ComplexError::TopFace(s));
        }
        let faces = e
            .cofaces
            .iter()
            .map(|&t| {
                let rest = self.tops[t as usize].iter().copied().filter(|v| !s.contains(v)).collect();
                (rest, self.weights[t as usize])
            })
            .collect();
        Self::build(self.dim - s.len(), faces)
    }

    /// Weighted 1-skeleton: edge measure Prob{e}, vertex measure ½Σν(e).
    pub fn one_skeleton(&self) -> Result<WGraph, ComplexError> {
        if self.dim < 1 {
            return Err(ComplexError::DimTooSmall { dim: self.dim, need: 1 });
        }
        let edges: Vec<(Vertex, Vertex, f64)> = self
            .faces(1)
            .iter()
            .map(|e| (e[0], e[1], self.face_measure(e).expect("own face")))
            .collect();
        Ok(WGraph::from_edges(&edges).expect("skeleton of a pure complex is a valid graph"))
    }

    /// 1-skeleton of the link of `s`.
    pub fn link_skeleton(&self, s: &[Vertex]) -> Result<WGraph, ComplexError> {
        self.link(s)?.one_skeleton()
    }

    /// Tensor with the complete complex on `t` vertices. Vertex `(i, v)` gets id
    /// `pos(v) * t + i` where `pos` is the rank of `v` in `X(0)`.
    pub fn tensor_with_complete(&self, t: usize) -> Result<Self, ComplexError> {
        let d = self.dim;
        if t < d + 1 {
            return Err(ComplexError::TooSmallT { t, need: d + 1 });
        }
        let pos: HashMap<Vertex, usize> =
            self.vertices().into_iter().enumerate().map(|(i, v)| (v, i)).collect();
        let per_top = binomial(t, d + 1) * factorial(d + 1);
        let mut faces = Vec::new();
        for (top, &w) in self.tops.iter().zip(&self.weights) {
            for idx in (0..t).combinations(d + 1) {
                for perm in idx.iter().copied().permutations(d + 1) {
                    let f: Face =
                        top.iter().zip(&perm).map(|(v, &i)| (pos[v] * t + i) as Vertex).collect();
                    faces.push((f, w / per_top));
                }
            }
        }
        Self::build(d, faces)
    }

    pub fn to_file(&self) -> ComplexFile {
        ComplexFile { dim: self.dim, faces: self.tops.clone(), weights: Some(self.weights.clone()) }
    }
}

/// Exact maximal vertex top-degree of the tensor `X^t`: `d!·C(t−1,d)·Q`.
pub fn tensor_max_degree(d: usize, t: usize, q: usize) -> f64 {
    factorial(d) * binomial(t - 1, d) * q as f64
}

/// JSON form: `{"dim": d, "faces": [[v...]...], "weights": [w...]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ComplexFile {
    pub dim: usize,
    pub faces: Vec<Vec<Vertex>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl ComplexFile {
    pub fn into_complex(self) -> Result<PureComplex, ComplexError> {
        match self.weights {
            None => PureComplex::uniform(self.dim, self.faces),
            Some(w) => {
                if w.len() != self.faces.len() {
                    return Err(ComplexError::WeightLen { got: w.len(), expected: self.faces.len() });
                }
                PureComplex::build(self.dim, self.faces.into_iter().zip(w).collect())
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Condition {
    pub pass: bool,
    pub witness: Option<Face>,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuitabilityReport {
    pub c: f64,
    pub r: f64,
    pub eta: f64,
    pub q: usize,
    pub log_base: &'static str,
    pub degree_bound: f64,
    pub hdx: Condition,
    pub degree: Condition,
    pub weights: Condition,
}

impl SuitabilityReport {
    pub fn pass(&self) -> bool {
        self.hdx.pass && self.degree.pass && self.weights.pass
    }
}

/// (c, r, η)-suitability check; each condition carries its first witness.
pub fn check_suitable(x: &PureComplex, c: f64, r: f64, eta: f64) -> SuitabilityReport {
    let q = x.max_degree();
    let bound = c * (1.0 + (q.max(1) as f64).ln());
    let hdx = spectral::is_hdx(x, eta, HdxMode::TwoSided);
    let hdx_cond = Condition {
        pass: hdx.pass,
        witness: hdx.worst.as_ref().map(|w| w.face.clone()),
        detail: format!("worst link lambda {:.6}", hdx.worst.as_ref().map_or(0.0, |w| w.value)),
    };
    let mut degree = Condition { pass: true, witness: None, detail: String::new() };
    let mut weights = Condition { pass: true, witness: None, detail: String::new() };
    if x.dim >= 2 {
        'outer: for l in 0..=x.dim - 2 {
            for s in x.faces(l) {
                let link = x.link(s).expect("proper face");
                let g = link.one_skeleton().expect("dim >= 1");
                if degree.pass {
                    for v in 0..g.n() {
                        if (g.degree(v) as f64) < bound {
                            degree = Condition {
                                pass: false,
                                witness: Some(s.clone()),
                                detail: format!(
                                    "vertex {} has link degree {} < {bound:.4}",
                                    g.label(v),
                                    g.degree(v)
                                ),
                            };
                            break;
                        }
                    }
                }
                if weights.pass {
                    let ne = g.edges().len() as f64;
                    let nv = g.n() as f64;
                    let bad_e = g.edges().iter().any(|&(_, _, w)| w < 1.0 / (r * ne) - MEASURE_TOL || w > r / ne + MEASURE_TOL);
                    let bad_v = g.vertex_mass().iter().any(|&w| w < 1.0 / (r * nv) - MEASURE_TOL || w > r / nv + MEASURE_TOL);
                    if bad_e || bad_v {
                        weights = Condition {
                            pass: false,
                            witness: Some(s.clone()),
                            detail: format!("link weights outside r-band (edges {bad_e}, vertices {bad_v})"),
                        };
                    }
                }
                if !degree.pass && !weights.pass {
                    break 'outer;
                }
            }
        }
    }
    SuitabilityReport { c, r, eta, q, log_base: "e", degree_bound: bound, hdx: hdx_cond, degree, weights }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn build_normalizes_and_rejects() {
        let x = PureComplex::uniform(2, vec![vec![1, 2, 3], vec![1, 2, 4], vec![1, 3, 4], vec![2, 3, 4]]).unwrap();
        assert!(x.weights().iter().all(|&w| close(w, 0.25)));
        let err = PureComplex::uniform(2, vec![vec![1, 2, 3], vec![1, 2, 4, 5]]).unwrap_err();
        assert!(matches!(err, ComplexError::NonPure { .. }));
        let err = PureComplex::uniform(1, vec![vec![1, 2], vec![2, 1]]).unwrap_err();
        assert!(matches!(err, ComplexError::DuplicateFace(_)));
        let err = PureComplex::build(1, vec![(vec![1, 2], 0.0)]).unwrap_err();
        assert_eq!(err, ComplexError::ZeroMeasure);
        let cyc = PureComplex::uniform(1, (0..6).map(|i| vec![i, (i + 1) % 6]).collect()).unwrap();
        assert!(cyc.weights().iter().all(|&w| close(w, 1.0 / 6.0)));
    }

    #[test]
    fn measures_of_k4() {
        let x = PureComplex::complete(4, 2).unwrap();
        assert!(close(x.face_measure(&[0]).unwrap(), 0.25));
        assert!(close(x.face_measure(&[0, 1]).unwrap(), 1.0 / 6.0));
        assert!(close(x.oriented_measure(&[1, 0]).unwrap(), 1.0 / 12.0));
        assert!(matches!(x.face_measure(&[0, 9]), Err(ComplexError::NotAFace(_))));
        for k in 0..=2 {
            let s: f64 = x.faces(k).iter().map(|f| x.face_measure(f).unwrap()).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn link_of_weighted_vertex() {
        let x = PureComplex::build(
            2,
            vec![(vec![1, 2, 3], 0.5), (vec![1, 2, 4], 0.25), (vec![1, 3, 4], 0.25)],
        )
        .unwrap();
        let l = x.link(&[1]).unwrap();
        assert_eq!(l.dim(), 1);
        let w: HashMap<Face, f64> = l.tops().iter().cloned().zip(l.weights().iter().copied()).collect();
        assert!(close(w[&vec![2, 3]], 0.5) && close(w[&vec![2, 4]], 0.25) && close(w[&vec![3, 4]], 0.25));
        assert!(matches!(x.link(&[1, 2, 3]), Err(ComplexError::TopFace(_))));
        assert_eq!(x.link(&[]).unwrap().tops(), x.tops());
    }

    #[test]
    fn degrees() {
        let x = PureComplex::complete(7, 3).unwrap();
        assert_eq!(x.degree(&[2], 3).unwrap(), 20);
        assert_eq!(x.degree(&[2, 5], 1).unwrap(), 1);
        assert_eq!(x.degree(&[2], 1).unwrap(), 6);
        assert!(matches!(x.degree(&[1, 2], 0), Err(ComplexError::BadLevel { .. })));
        assert_eq!(x.max_degree(), 20);
    }

    #[test]
    fn tensor_single_triangle() {
        let x = PureComplex::uniform(2, vec![vec![0, 1, 2]]).unwrap();
        let xt = x.tensor_with_complete(3).unwrap();
        assert_eq!(xt.tops().len(), 6);
        assert!(xt.weights().iter().all(|&w| close(w, 1.0 / 6.0)));
        assert_eq!(xt.num_vertices(), 9);
        assert_eq!(xt.max_degree() as f64, tensor_max_degree(2, 3, 1));
        assert!(matches!(x.tensor_with_complete(2), Err(ComplexError::TooSmallT { .. })));
    }

    #[test]
    fn suitability_of_complete() {
        let x = PureComplex::complete(20, 2).unwrap();
        let rep = check_suitable(&x, 1.1, 1.01, 0.3);
        assert!(rep.pass(), "{rep:?}");
        // a 1-dim path has a link-degree-1 vertex
        let x = PureComplex::uniform(2, vec![vec![0, 1, 2], vec![0, 2, 3]]).unwrap();
        let rep = check_suitable(&x, 2.0, 2.0, 0.9);
        assert!(!rep.degree.pass);
        assert!(rep.degree.witness.is_some());
    }

    #[test]
    fn json_roundtrip_default_uniform() {
        let f: ComplexFile = serde_json::from_str(r#"{"dim":1,"faces":[[0,1],[1,2]]}"#).unwrap();
        let x = f.into_complex().unwrap();
        assert!(close(x.weights()[0], 0.5));
    }
}
