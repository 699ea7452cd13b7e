//! Weighted pure complexes: measures, links, the tensor construction and the
//! suitability conditions a complex must meet before pruning.

use hdx_cover::complex::{check_suitable, tensor_max_degree};
use hdx_cover::spectral::{is_hdx, HdxMode};
use hdx_cover::PureComplex;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let x = PureComplex::complete(8, 2)?;
    println!("K_8^(2): {} vertices, {} edges, {} triangles", x.num_vertices(), x.faces(1).len(), x.tops().len());
    println!("Prob(vertex 0) = {:.4}, Prob(edge 01) = {:.4}", x.face_measure(&[0])?, x.face_measure(&[0, 1])?);

    // the link of a vertex is the complete graph on the other seven
    let link = x.link(&[0])?;
    println!("link of 0: dim {}, {} tops", link.dim(), link.tops().len());
    let hdx = is_hdx(&x, 0.2, HdxMode::TwoSided);
    println!("two-sided worst λ = {:.4} over {} links", hdx.worst.map_or(0.0, |w| w.value), hdx.links.len());

    // non-uniform weights survive the link computation
    let skewed = x.with_weights(&(0..x.tops().len()).map(|i| 1.0 + (i % 3) as f64).collect::<Vec<_>>())?;
    println!("skewed Prob(vertex 0) = {:.4}", skewed.face_measure(&[0])?);

    let t = 3;
    let xt = PureComplex::complete(5, 2)?.tensor_with_complete(t)?;
    println!(
        "tensor with t={t}: {} vertices, max degree {} (formula {})",
        xt.num_vertices(),
        xt.max_degree(),
        tensor_max_degree(2, t, PureComplex::complete(5, 2)?.max_degree())
    );

    let suit = check_suitable(&PureComplex::complete(30, 2)?, 2.0, 2.5, 0.4);
    println!("K_30^(2) suitable at (c=2, r=2.5, η=0.4): {}", suit.pass());
    Ok(())
}
