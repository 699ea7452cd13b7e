//! Covers of the seven-vertex torus. A labeling pulled back from a linear map
//! on the lattice is a cocycle with full holonomy, so every quotient of the
//! group gives a connected cover.

use hdx_cover::covers::{
    build_cover, coboundary, connected_components, holonomy_subgroup, is_cocycle, push_cocycle, verify_cover,
    GroupLabeling, TreeKind,
};
use hdx_cover::groups::{normal_subgroups, quotient_group, GroupTable};
use hdx_cover::PureComplex;
use std::collections::HashMap;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let faces: Vec<Vec<u32>> =
        (0..7).flat_map(|i| [vec![i, (i + 1) % 7, (i + 3) % 7], vec![i, (i + 2) % 7, (i + 3) % 7]]).collect();
    let torus = PureComplex::uniform(2, faces)?;
    let g = GroupTable::cyclic(6)?;

    // steps 1, 2, 3 are lattice vectors (1,0), (-1,1), (0,1); φ(a, b) = a
    let phi = |k: u32| -> i64 {
        match k {
            1 => 1,
            2 => -1,
            3 => 0,
            _ => unreachable!(),
        }
    };
    let labels = torus
        .faces(1)
        .iter()
        .map(|e| {
            let k = (e[1] + 7 - e[0]) % 7;
            let a = if k <= 3 { phi(k) } else { -phi(7 - k) };
            a.rem_euclid(6) as u32
        })
        .collect();
    let f = GroupLabeling::new(&torus, &g, labels)?;
    println!("cocycle: {}", is_cocycle(&torus, &g, &f));
    let h = holonomy_subgroup(&torus, &g, &f, 0, TreeKind::Bfs)?;
    println!("holonomy at 0: {h:?}");

    for n in normal_subgroups(&g) {
        let (q, proj) = quotient_group(&g, &n)?;
        let fq = push_cocycle(&torus, &g, &f, &proj)?;
        let cover = build_cover(&torus, &q, &fq)?;
        let ok = verify_cover(&cover.complex, &torus, &|v| cover.phi(v)).pass;
        println!(
            "Z/6 / {n:?}: {} vertices, {} component(s), locally isomorphic: {ok}",
            cover.complex.num_vertices(),
            connected_components(&cover.complex).0
        );
    }

    // a coboundary has trivial holonomy: the cover falls apart into copies
    let h0: HashMap<u32, u32> = (0..7).map(|v| (v, v % 6)).collect();
    let cb = build_cover(&torus, &g, &coboundary(&torus, &g, &h0))?;
    println!("coboundary cover: {} components", connected_components(&cb.complex).0);
    Ok(())
}
