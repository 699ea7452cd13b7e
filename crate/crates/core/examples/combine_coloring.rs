//! Color the complete complex K_40 by the vertices of K_5 so that the kept
//! faces form a non-degenerate homomorphic image, then certify it.

use hdx_cover::combine::{verify_combine, CombineConfig, CombineStatus, Combiner};
use hdx_cover::PureComplex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args().nth(1).map_or(Ok(1), |s| s.parse())?;
    let x = PureComplex::complete(40, 2)?;
    let c = PureComplex::complete(5, 2)?;
    let cb = Combiner::new(&x, &c)?;
    let cfg = CombineConfig::new(0.35);
    let out = cb.moser_tardos(&cfg, &mut ChaCha8Rng::seed_from_u64(seed));
    println!("seed {seed}: {:?} after {} resamples", out.status, out.resamples);
    if out.status != CombineStatus::Clean {
        return Ok(());
    }
    let y = out.y.as_ref().expect("clean");
    let rep = verify_combine(&cb, &out.coloring, y, cfg.lambda);
    println!("kept {} of {} triangles", y.tops().len(), x.tops().len());
    println!("homomorphism {}, non-degenerate {}", rep.homomorphism, rep.non_degenerate);
    println!("worst λ {:.4} vs threshold {:.4}", rep.worst_lambda, rep.hdx_threshold);
    println!("connected {}, overall {}", rep.connected, rep.pass);
    Ok(())
}
