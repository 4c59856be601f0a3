//! Run the dense-reference checks and compare one small majorization
//! quantity by quantity.
//!
//! cargo run --release --example oracle_checks -- [seed]

use jcas::campaign::trial_rng;
use jcas::constellation::{modulate, BitStream, ConstellationSpec, SubcarrierMask};
use jcas::oracle::{fast_vs_dense, verification_suite};
use jcas::spectrum::LagWeights;

fn main() -> jcas::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    for r in verification_suite(seed)? {
        println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
    }

    let (n, m) = (8, 2);
    let spec = ConstellationSpec::qpsk(0.15, 0.2)?;
    let mask = SubcarrierMask::all_used(n, m);
    let mut rng = trial_rng(seed, 1);
    let grid = modulate(
        &BitStream::random(&mut rng, spec.bits_per_symbol() * n * m),
        &spec,
        &mask,
    )?;
    let rep = fast_vs_dense(&grid, &LagWeights::cyclic_prefix(n, 4)?, 4)?;
    println!("N={n} M={m}: {rep:?}");
    Ok(())
}
