//! Cyclic auto- and cross-correlations of a random QPSK grid and of the
//! interleaved orthogonal grid, with the peak sidelobe inside the CP window.
//!
//! cargo run --release --example correlations -- [seed]

use jcas::campaign::trial_rng;
use jcas::constellation::{modulate, orthogonal_interleaved_grid, BitStream, ConstellationSpec, SubcarrierMask};
use jcas::spectrum::{cyclic_correlations, mainlobe, peak_sidelobe, psl_db, LagWeights, SymbolGrid};

fn show(label: &str, grid: &SymbolGrid, w: &LagWeights) -> jcas::Result<()> {
    let corr = cyclic_correlations(grid);
    let (eta, (m, k, i)) = peak_sidelobe(&corr, w)?;
    println!(
        "{label:12} mainlobe {:.1}, peak sidelobe {eta:.2} at (m={m}, k={k}, lag {i}), PSL {:.2} dB",
        mainlobe(&corr),
        psl_db(&corr, w)?
    );
    for a in 0..grid.m() {
        let row: Vec<String> = (0..grid.m())
            .map(|b| {
                let peak = (1..w.len()).map(|i| corr.get(a, b, i).norm()).fold(0.0, f64::max);
                format!("{peak:7.2}")
            })
            .collect();
        println!("  antenna {a}: {}", row.join(" "));
    }
    Ok(())
}

fn main() -> jcas::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let (n, m, n_cp) = (128, 4, 32);
    let spec = ConstellationSpec::qpsk(0.15, 0.2)?;
    let w = LagWeights::cyclic_prefix(n, n_cp)?;
    let mut rng = trial_rng(seed, 0);

    let mask = SubcarrierMask::all_used(n, m);
    let bits = BitStream::random(&mut rng, spec.bits_per_symbol() * mask.used_count());
    show("random", &modulate(&bits, &spec, &mask)?, &w)?;
    show("interleaved", &orthogonal_interleaved_grid(&mut rng, &spec, n, m)?, &w)?;
    Ok(())
}
