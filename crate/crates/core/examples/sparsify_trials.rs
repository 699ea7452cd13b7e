//! Random vertex splits and edge subsampling of dense expanders.

use hdx_cover::sparsify::{
    bipartite_circulant, complete_graph, random_offsets, sparsify_trial, subsample_csv, subsample_trials,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let k = complete_graph(300);
    let rep = sparsify_trial(&k, 0.3, 1.0, 50, 0.01, 1);
    println!(
        "K_300, p = 0.3: λ(G) = {:.5}, λ(H) within 100λ(G)/p³ in {:.0}% of trials",
        rep.lambda_g,
        100.0 * rep.rate_h_within_bound
    );

    // subsampling a 40-regular bipartite expander directly
    let g = bipartite_circulant(100, &random_offsets(100, 40, 9));
    let rep = subsample_trials(&g, 0.5, 50, 2)?;
    println!("circulant: λ = {:.4}; after p_edge = 0.5, λ ≤ 0.95 in {:.0}% of trials", rep.lambda_h, 100.0 * rep.rate_at_most(0.95));
    print!("{}", subsample_csv(&rep).lines().take(4).collect::<Vec<_>>().join("\n"));
    println!();
    Ok(())
}
