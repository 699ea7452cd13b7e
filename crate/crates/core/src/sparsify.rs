//! Random bipartite splits and edge subsampling of near-uniform expanders.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::complex::Vertex;
use crate::harness::splitmix64;
use crate::spectral::{adjacency_spectrum, lambda_report, HdxMode, SpectralError, WGraph};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SparsifyError {
    #[error("probability {0} out of range")]
    BadProbability(f64),
    #[error("a side of the split came out empty")]
    EmptySide,
    #[error("no edges survived")]
    EmptyResult,
    #[error("graph has no bipartition")]
    NotBipartite,
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Clone, Debug)]
pub struct SplitSample {
    pub a: Vec<Vertex>,
    pub b: Vec<Vertex>,
    /// `E(A,B)` with renormalized measure; vertices without crossing edges are dropped
    pub h: WGraph,
    pub dropped: usize,
}

/// Two-phase side assignment over `labels`: `A` w.p. `p`, then `B` w.p. `p/(1−p)`
/// among the rest. Each vertex lands in either side with marginal probability `p`.
pub fn split_sides(labels: &[Vertex], p: f64, rng: &mut impl Rng) -> (Vec<Vertex>, Vec<Vertex>) {
    let q = p / (1.0 - p);
    let in_a: Vec<bool> = labels.iter().map(|_| rng.gen_bool(p)).collect();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (&v, &ia) in labels.iter().zip(&in_a) {
        if ia {
            a.push(v);
        } else if rng.gen_bool(q) {
            b.push(v);
        }
    }
    (a, b)
}

pub fn bipartite_vertex_split(g: &WGraph, p: f64, rng: &mut impl Rng) -> Result<SplitSample, SparsifyError> {
    if !(p > 0.0 && p < 0.5) {
        return Err(SparsifyError::BadProbability(p));
    }
    let (a, b) = split_sides(g.labels(), p, rng);
    if a.is_empty() || b.is_empty() {
        return Err(SparsifyError::EmptySide);
    }
    let mut side = vec![0u8; g.n()];
    for &v in &a {
        side[g.index_of(v).unwrap()] = 1;
    }
    for &v in &b {
        side[g.index_of(v).unwrap()] = 2;
    }
    let edges: Vec<(Vertex, Vertex, f64)> = g
        .edges()
        .iter()
        .filter(|&&(i, j, _)| side[i] * side[j] == 2)
        .map(|&(i, j, w)| (g.label(i), g.label(j), w))
        .collect();
    if edges.is_empty() {
        return Err(SparsifyError::EmptySide);
    }
    let h = WGraph::from_edges(&edges)?;
    let left: Vec<Vertex> = a.iter().copied().filter(|&v| h.index_of(v).is_some()).collect();
    let dropped = a.len() + b.len() - h.n();
    let h = h.with_left_side(&left)?;
    Ok(SplitSample { a, b, h, dropped })
}

/// Keep each edge independently with probability `p`; returns the survivor
/// graph (bipartition kept) and the number of vertices left isolated.
pub fn edge_subsample(h: &WGraph, p: f64, rng: &mut impl Rng) -> Result<(WGraph, usize), SparsifyError> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(SparsifyError::BadProbability(p));
    }
    let kept: Vec<(Vertex, Vertex, f64)> =
        h.edge_weights_by_label().into_iter().filter(|_| rng.gen_bool(p)).collect();
    if kept.is_empty() {
        return Err(SparsifyError::EmptyResult);
    }
    let mut out = WGraph::from_edges(&kept)?;
    if let Some(side) = h.left_side() {
        let left: Vec<Vertex> = (0..h.n()).filter(|&i| side[i]).map(|i| h.label(i)).collect();
        out = out.with_left_side(&left)?;
    }
    let dropped = h.n() - out.n();
    Ok((out, dropped))
}

/// `r ≥ 1` with every edge weight in `[1/(r|E|), r/|E|]` and vertex weight in `[1/(r|V|), r/|V|]`.
pub fn near_uniformity(g: &WGraph) -> f64 {
    let ne = g.edges().len() as f64;
    let nv = g.n() as f64;
    let spread = |x: f64| x.max(1.0 / x);
    let e = g.edges().iter().map(|e| spread(e.2 * ne)).fold(1.0, f64::max);
    g.vertex_mass().iter().map(|&m| spread(m * nv)).fold(e, f64::max)
}

pub fn min_degree(g: &WGraph) -> usize {
    (0..g.n()).map(|i| g.degree(i)).min().unwrap_or(0)
}

/// Smallest `ε ∈ (0, 0.05)` with `λ < (1−ε/4)ε³p³`, if any.
pub fn subsample_epsilon(lambda: f64, p: f64) -> Option<f64> {
    let ok = |e: f64| lambda < (1.0 - 0.25 * e) * e.powi(3) * p.powi(3);
    if !ok(0.05 - 1e-12) {
        return None;
    }
    let (mut lo, mut hi) = (0.0, 0.05 - 1e-12);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// `260 ε (1 + ln(3/ε))`.
pub fn subsample_bound(eps: f64) -> f64 {
    260.0 * eps * (1.0 + (3.0 / eps).ln())
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialRow {
    pub trial: usize,
    pub seed: u64,
    pub a: usize,
    pub b: usize,
    pub dropped: usize,
    pub lambda_h: f64,
    pub lambda_h_prime: Option<f64>,
    pub dropped_h_prime: usize,
    /// `ν_G(A)`, `ν_G(B)`
    pub nu_a: f64,
    pub nu_b: f64,
    /// `|ν_G(A) − p| ≤ εp`
    pub mass_a_ok: bool,
    pub mass_b_ok: bool,
    /// every `v ∈ A` sends within `εp` of a `p` share of its mass into `B`
    pub vertices_ok: bool,
    /// share of `A` vertices that individually satisfy the previous bullet
    pub vertex_rate: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialReport {
    pub trials: usize,
    pub discarded: usize,
    pub p_split: f64,
    pub p_edge: f64,
    pub epsilon: f64,
    pub lambda_g: f64,
    pub near_uniformity: f64,
    pub min_degree: usize,
    /// `100 λ(G) / p³`
    pub bound_h: f64,
    pub rows: Vec<TrialRow>,
    pub rate_h_within_bound: f64,
    /// `ε` for the subsampling bound from the median `λ(H)`, when it exists
    pub subsample_epsilon: Option<f64>,
    pub bound_h_prime: Option<f64>,
    pub rate_mass_a: f64,
    pub rate_mass_b: f64,
    pub rate_all_vertices: f64,
    pub mean_vertex_rate: f64,
}

impl TrialReport {
    pub fn rate_h_prime_at_most(&self, t: f64) -> f64 {
        let n = self.rows.len().max(1) as f64;
        self.rows.iter().filter(|r| r.lambda_h_prime.is_some_and(|l| l <= t)).count() as f64 / n
    }
}

pub fn trial_seed(master: u64, trial: usize) -> u64 {
    splitmix64(master ^ splitmix64(trial as u64 + 1))
}

fn run_trial(g: &WGraph, p_split: f64, p_edge: f64, eps: f64, trial: usize, seed: u64) -> Option<TrialRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sp = bipartite_vertex_split(g, p_split, &mut rng).ok()?;
    let lambda_h = lambda_report(&sp.h, HdxMode::Bipartite).ok()?;
    let (lambda_h_prime, dropped_h_prime) = match edge_subsample(&sp.h, p_edge, &mut rng) {
        Ok((hp, dr)) => (lambda_report(&hp, HdxMode::Bipartite).ok(), dr),
        Err(_) => (None, sp.h.n()),
    };
    let mass = |s: &[Vertex]| s.iter().map(|&v| g.vertex_mass()[g.index_of(v).unwrap()]).sum::<f64>();
    let (nu_a, nu_b) = (mass(&sp.a), mass(&sp.b));
    let mut in_b = vec![false; g.n()];
    for &v in &sp.b {
        in_b[g.index_of(v).unwrap()] = true;
    }
    let good: Vec<bool> = sp
        .a
        .iter()
        .map(|&v| {
            let i = g.index_of(v).unwrap();
            let total: f64 = g.neighbors(i).iter().map(|n| n.1).sum();
            let into_b: f64 = g.neighbors(i).iter().filter(|n| in_b[n.0]).map(|n| n.1).sum();
            (into_b - p_split * total).abs() < eps * p_split * total
        })
        .collect();
    Some(TrialRow {
        trial,
        seed,
        a: sp.a.len(),
        b: sp.b.len(),
        dropped: sp.dropped,
        lambda_h,
        lambda_h_prime,
        dropped_h_prime,
        nu_a,
        nu_b,
        mass_a_ok: (nu_a - p_split).abs() <= eps * p_split,
        mass_b_ok: (nu_b - p_split).abs() <= eps * p_split,
        vertices_ok: good.iter().all(|&x| x),
        vertex_rate: good.iter().filter(|&&x| x).count() as f64 / good.len() as f64,
    })
}

/// Split, then subsample, `trials` times from per-trial seeds; `ε` is the
/// tolerance for the mass-concentration checks.
pub fn sparsify_trial(g: &WGraph, p_split: f64, p_edge: f64, trials: usize, eps: f64, seed: u64) -> TrialReport {
    let lambda_g = adjacency_spectrum(g).two_sided;
    let outcomes: Vec<Option<TrialRow>> = (0..trials)
        .into_par_iter()
        .map(|t| run_trial(g, p_split, p_edge, eps, t, trial_seed(seed, t)))
        .collect();
    let discarded = outcomes.iter().filter(|o| o.is_none()).count();
    let rows: Vec<TrialRow> = outcomes.into_iter().flatten().collect();
    let n = rows.len().max(1) as f64;
    let rate = |pred: &dyn Fn(&TrialRow) -> bool| rows.iter().filter(|r| pred(r)).count() as f64 / n;
    let bound_h = 100.0 * lambda_g / p_split.powi(3);
    let mut lh: Vec<f64> = rows.iter().map(|r| r.lambda_h).collect();
    lh.sort_by(f64::total_cmp);
    let subsample_epsilon = lh.get(lh.len() / 2).and_then(|&l| subsample_epsilon(l, p_edge));
    TrialReport {
        trials,
        discarded,
        p_split,
        p_edge,
        epsilon: eps,
        lambda_g,
        near_uniformity: near_uniformity(g),
        min_degree: min_degree(g),
        bound_h,
        rate_h_within_bound: rate(&|r| r.lambda_h <= bound_h),
        subsample_epsilon,
        bound_h_prime: subsample_epsilon.map(subsample_bound),
        rate_mass_a: rate(&|r| r.mass_a_ok),
        rate_mass_b: rate(&|r| r.mass_b_ok),
        rate_all_vertices: rate(&|r| r.vertices_ok),
        mean_vertex_rate: rows.iter().map(|r| r.vertex_rate).sum::<f64>() / n,
        rows,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SubsampleRow {
    pub trial: usize,
    pub seed: u64,
    /// `None` when nothing survived
    pub lambda: Option<f64>,
    pub dropped: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SubsampleReport {
    pub trials: usize,
    pub p_edge: f64,
    pub lambda_h: f64,
    pub min_degree: usize,
    pub subsample_epsilon: Option<f64>,
    pub bound: Option<f64>,
    pub rows: Vec<SubsampleRow>,
}

impl SubsampleReport {
    pub fn rate_at_most(&self, t: f64) -> f64 {
        let n = self.rows.len().max(1) as f64;
        self.rows.iter().filter(|r| r.lambda.is_some_and(|l| l <= t)).count() as f64 / n
    }
}

/// Edge subsampling applied directly to a bipartite `H`, `trials` times.
pub fn subsample_trials(h: &WGraph, p_edge: f64, trials: usize, seed: u64) -> Result<SubsampleReport, SparsifyError> {
    if !h.is_bipartite() {
        return Err(SparsifyError::NotBipartite);
    }
    let lambda_h = lambda_report(h, HdxMode::Bipartite)?;
    let rows = (0..trials)
        .into_par_iter()
        .map(|t| {
            let seed = trial_seed(seed, t);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            match edge_subsample(h, p_edge, &mut rng) {
                Ok((hp, dropped)) => Ok(SubsampleRow { trial: t, seed, lambda: lambda_report(&hp, HdxMode::Bipartite).ok(), dropped }),
                Err(SparsifyError::EmptyResult) => Ok(SubsampleRow { trial: t, seed, lambda: None, dropped: h.n() }),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let subsample_epsilon = subsample_epsilon(lambda_h, p_edge);
    Ok(SubsampleReport {
        trials,
        p_edge,
        lambda_h,
        min_degree: min_degree(h),
        subsample_epsilon,
        bound: subsample_epsilon.map(subsample_bound),
        rows,
    })
}

pub fn subsample_csv(rep: &SubsampleReport) -> String {
    let mut s = String::from("trial,seed,lambda,dropped\n");
    for r in &rep.rows {
        let l = r.lambda.map_or_else(String::new, |l| format!("{l:.12}"));
        s.push_str(&format!("{},{},{},{}\n", r.trial, r.seed, l, r.dropped));
    }
    s
}

/// Per-trial CSV: `trial,seed,a,b,lambda_h,lambda_h_prime`.
pub fn trials_csv(rep: &TrialReport) -> String {
    let mut s = String::from("trial,seed,a,b,lambda_h,lambda_h_prime\n");
    for r in &rep.rows {
        let hp = r.lambda_h_prime.map_or_else(String::new, |l| format!("{l:.12}"));
        s.push_str(&format!("{},{},{},{},{:.12},{}\n", r.trial, r.seed, r.a, r.b, r.lambda_h, hp));
    }
    s
}

/// Complete graph `K_n` with uniform weights.
pub fn complete_graph(n: u32) -> WGraph {
    let edges: Vec<(Vertex, Vertex, f64)> =
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j, 1.0))).collect();
    WGraph::from_edges(&edges).expect("n >= 2")
}

/// Bipartite circulant: left `i` joined to right `n + (i + o) mod n` for each offset.
pub fn bipartite_circulant(n: u32, offsets: &[u32]) -> WGraph {
    let edges: Vec<(Vertex, Vertex, f64)> =
        (0..n).flat_map(|i| offsets.iter().map(move |&o| (i, n + (i + o) % n, 1.0))).collect();
    let left: Vec<Vertex> = (0..n).collect();
    WGraph::from_edges(&edges).expect("nonempty").with_left_side(&left).expect("crossing edges")
}

/// `k` distinct offsets in `0..n`, drawn from `seed`.
pub fn random_offsets(n: u32, k: usize, seed: u64) -> Vec<u32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut all: Vec<u32> = (0..n).collect();
    for i in 0..k {
        let j = rng.gen_range(i..all.len());
        all.swap(i, j);
    }
    let mut out = all[..k].to_vec();
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsample_trials_on_bipartite_circulant() {
        let g = bipartite_circulant(30, &random_offsets(30, 12, 4));
        let rep = subsample_trials(&g, 1.0, 3, 7).unwrap();
        for r in &rep.rows {
            assert!((r.lambda.unwrap() - rep.lambda_h).abs() < 1e-9);
        }
        assert!(matches!(subsample_trials(&complete_graph(5), 0.5, 1, 0), Err(SparsifyError::NotBipartite)));
    }

    #[test]
    fn split_marginals() {
        let labels: Vec<Vertex> = (0..300).collect();
        let (mut ca, mut cb) = (0usize, 0usize);
        let seeds = 10_000;
        for s in 0..seeds {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(99, s));
            let (a, b) = split_sides(&labels, 0.3, &mut rng);
            ca += a.contains(&17) as usize;
            cb += b.contains(&17) as usize;
            assert!(a.iter().all(|v| !b.contains(v)));
        }
        let sd = (0.3f64 * 0.7 / seeds as f64).sqrt();
        assert!((cb as f64 / seeds as f64 - 0.3).abs() < 3.0 * sd, "B marginal {cb}");
        assert!((ca as f64 / seeds as f64 - 0.3).abs() < 3.0 * sd, "A marginal {ca}");
    }

    #[test]
    fn tiny_p_expectation() {
        let labels: Vec<Vertex> = (0..100).collect();
        let mut tot = 0usize;
        for s in 0..2000 {
            tot += split_sides(&labels, 0.01, &mut ChaCha8Rng::seed_from_u64(s)).0.len();
        }
        let mean = tot as f64 / 2000.0;
        assert!((mean - 1.0).abs() < 3.0 * (0.99f64 / 2000.0).sqrt());
    }

    #[test]
    fn split_is_bipartite_and_seeded() {
        let g = complete_graph(40);
        let s1 = bipartite_vertex_split(&g, 0.3, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let s2 = bipartite_vertex_split(&g, 0.3, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(s1.a, s2.a);
        let side = s1.h.left_side().unwrap();
        for &(i, j, _) in s1.h.edges() {
            assert_ne!(side[i], side[j]);
        }
        assert!(matches!(bipartite_vertex_split(&g, 0.5, &mut ChaCha8Rng::seed_from_u64(5)), Err(SparsifyError::BadProbability(_))));
    }

    #[test]
    fn subsample_identity_and_counts() {
        let h = bipartite_circulant(100, &(0..100).collect::<Vec<_>>());
        let (same, dropped) = edge_subsample(&h, 1.0, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(dropped, 0);
        assert_eq!(same.edges().len(), h.edges().len());
        let l1 = lambda_report(&h, HdxMode::Bipartite).unwrap();
        let l2 = lambda_report(&same, HdxMode::Bipartite).unwrap();
        assert!((l1 - l2).abs() < 1e-12);
        let (half, _) = edge_subsample(&h, 0.5, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let k = half.edges().len() as f64;
        assert!((k - 5000.0).abs() < 3.0 * 50.0, "{k}");
        let w = 1.0 / k;
        assert!(half.edges().iter().all(|e| (e.2 - w).abs() < 1e-12));
    }

    #[test]
    fn uniform_complete_graph_is_one_uniform() {
        assert!((near_uniformity(&complete_graph(30)) - 1.0).abs() < 1e-9);
        assert_eq!(min_degree(&complete_graph(30)), 29);
    }

    #[test]
    fn trial_with_full_retention_matches() {
        let g = complete_graph(60);
        let rep = sparsify_trial(&g, 0.3, 1.0, 6, 0.1, 3);
        for r in &rep.rows {
            assert!((r.lambda_h - r.lambda_h_prime.unwrap()).abs() < 1e-12);
        }
        let again = sparsify_trial(&g, 0.3, 1.0, 6, 0.1, 3);
        assert_eq!(trials_csv(&rep), trials_csv(&again));
    }

    #[test]
    fn subsample_epsilon_bracket() {
        assert!(subsample_epsilon(0.5, 0.5).is_none());
        let e = subsample_epsilon(1e-7, 0.5).unwrap();
        assert!(1e-7 < (1.0 - 0.25 * e) * e.powi(3) * 0.125);
        assert!(subsample_bound(e) > 0.0);
    }
}
