//! Spectral certificates on weighted graphs: expansion, the mixing lemma by
//! exhaustive enumeration, its bipartite converse, and trickle-down.

use hdx_cover::complex::PureComplex;
use hdx_cover::spectral::{
    adjacency_spectrum, converse_eml_bound, eml_check, eml_discrepancy, lambda_report, trickle_down, EmlStrategy,
    HdxMode, WGraph,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let k6 = PureComplex::complete(6, 1)?.one_skeleton()?;
    let spec = adjacency_spectrum(&k6);
    println!("K_6 eigenvalues: {:?}", spec.eigenvalues.iter().map(|e| format!("{e:.4}")).collect::<Vec<_>>());

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut edges = Vec::new();
    for u in 0..10u32 {
        for v in u + 1..10 {
            if rng.gen_bool(0.6) {
                edges.push((u, v, rng.gen_range(0.1..2.0)));
            }
        }
    }
    let g = WGraph::from_edges(&edges)?;
    let lam = lambda_report(&g, HdxMode::TwoSided)?;
    let check = eml_check(&g, lam, 14)?;
    println!("random graph: λ = {lam:.4}, mixing lemma violated on {} of {} pairs", check.violations, check.pairs);

    // bipartite: λ is bounded by the converse in terms of the discrepancy
    let mut bedges = Vec::new();
    for u in 0..8u32 {
        for v in 8..16u32 {
            if rng.gen_bool(0.5) {
                bedges.push((u, v, 1.0));
            }
        }
    }
    let b = WGraph::from_edges(&bedges)?.with_left_side(&(0..8).collect::<Vec<_>>())?;
    let lb = lambda_report(&b, HdxMode::Bipartite)?;
    let disc = eml_discrepancy(&b, EmlStrategy::Exact, 14, &mut rng)?;
    println!("bipartite: λ = {lb:.4}, α = {:.4}, converse bound = {:.2}", disc.alpha, converse_eml_bound(disc.alpha)?);

    let td = trickle_down(&PureComplex::complete(9, 2)?);
    for c in td.checks.iter().take(3) {
        println!("trickle-down level {}: λ₂ = {:.4} ≤ {:.4}: {}", c.level, c.lambda2, c.bound, c.holds);
    }
    Ok(())
}
