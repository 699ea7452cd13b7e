//! Prune the complete complex K_30 against Cay(Z/5, {±1,±2}), then lift the
//! surviving complex to its Z/5-cover and certify both.

use hdx_cover::covers::{build_cover, connected_components, holonomy_subgroup, link_spectra_gap, TreeKind};
use hdx_cover::groups::{GenSet, GroupTable};
use hdx_cover::pruning::{face_fractions, PruneConfig, PruneStatus, Pruner};
use hdx_cover::spectral::{is_hdx, HdxMode};
use hdx_cover::PureComplex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args().nth(1).map_or(Ok(7), |s| s.parse())?;
    let x = PureComplex::complete(30, 2)?;
    let g = GroupTable::cyclic(5)?;
    let s = GenSet::new(&g, &[1, 4, 2, 3])?;
    let p = Pruner::new(&x, &g, &s)?;
    let cfg = PruneConfig::empirical(0.95);

    let out = p.moser_tardos(&cfg, &mut ChaCha8Rng::seed_from_u64(seed));
    println!("seed {seed}: {:?} after {} resamples", out.status, out.resamples);
    if out.status != PruneStatus::Clean {
        println!("still violated: {:?}", out.remaining);
        return Ok(());
    }
    let y = out.y.as_ref().expect("clean runs keep at least one face");
    println!("kept {} of {} triangles", y.tops().len(), x.tops().len());
    for ff in face_fractions(&x, y, s.len()) {
        println!("  level {}: {:.3} (floor {:.5})", ff.level, ff.fraction, ff.bound);
    }

    let hdx = is_hdx(y, cfg.lambda, HdxMode::TwoSided);
    println!("worst link λ = {:.4} (target {})", hdx.worst.as_ref().map_or(0.0, |w| w.value), cfg.lambda);
    println!("measure ratio = {:.3}", p.measure_ratio_audit_all(&out.labeling, y)?);

    let f = p.restrict_labeling(&out.labeling, y);
    let h = holonomy_subgroup(y, &g, &f, 0, TreeKind::Bfs)?;
    let cover = build_cover(y, &g, &f)?;
    println!(
        "holonomy order {} / {}, cover has {} vertices in {} component(s)",
        h.len(),
        g.order(),
        cover.complex.num_vertices(),
        connected_components(&cover.complex).0
    );
    println!("link spectra gap = {:.2e}", link_spectra_gap(&cover, y));
    Ok(())
}
