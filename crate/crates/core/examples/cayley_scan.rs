//! Finite groups, their Cayley clique complexes, and a scan for generating
//! sets whose vertex link expands well.

use hdx_cover::groups::{
    cayley_clique_complex, cayley_link_lambda, local_identity_link, normal_subgroups, quotient_group, scan_gensets,
    GenSet, GroupTable,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let z7 = GroupTable::cyclic(7)?;
    let s = GenSet::new(&z7, &[1, 6, 2, 5])?;
    let c = cayley_clique_complex(&z7, &s, 2)?;
    println!("C(Z/7, ±1±2): {} triangles", c.complex.tops().len());
    let ce = local_identity_link(&z7, &s, 2)?;
    println!("identity link: {} edges, λ = {:.4}", ce.tops().len(), cayley_link_lambda(&ce));

    let s3 = GroupTable::symmetric(3)?;
    println!("S_3 abelian: {}, witness {:?}", s3.is_abelian(), s3.non_abelian_witness());
    for n in normal_subgroups(&s3) {
        let (q, _) = quotient_group(&s3, &n)?;
        println!("  normal subgroup {n:?} -> quotient of order {}", q.order());
    }

    let scan = scan_gensets(&GroupTable::cyclic(11)?, 2, 6, 0.6, 5);
    println!("Z/11 scan: {} generating sets tried", scan.enumerated);
    for cand in &scan.candidates {
        println!("  S = {:?}: λ = {:.4} (meets target: {})", cand.gens, cand.lambda, cand.meets_target);
    }
    Ok(())
}
