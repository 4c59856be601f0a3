//! Optimize one random QPSK grid at the default settings and print the
//! peak-sidelobe trace.
//!
//! cargo run --release --example optimize_waveform -- [seed]

use jcas::campaign::{draw_reference, optimize_reference, trial_rng, WaveformConfig};
use jcas::optimizer::OptimizerConfig;

fn main() -> jcas::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let wave = WaveformConfig::default();
    let spec = wave.spec()?;
    let mut rng = trial_rng(seed, 0);
    let reference = draw_reference(&mut rng, &wave)?;

    for (label, accelerated) in [("mm", false), ("squarem", true)] {
        let cfg = OptimizerConfig {
            accelerated,
            ..Default::default()
        };
        let t0 = std::time::Instant::now();
        let rep = optimize_reference(&reference, &spec, &wave, &cfg)?;
        println!(
            "{label:8} PSL {:.2} dB -> {:.2} dB, {} iterations ({}), {:.1} ms",
            rep.psl_db_before,
            rep.psl_db_after,
            rep.iterations_used,
            rep.stop_reason.as_str(),
            t0.elapsed().as_secs_f64() * 1e3
        );
        for (i, eta) in rep.eta_trace.iter().enumerate() {
            println!("  {i:2} eta = {eta:.4}");
        }
    }
    Ok(())
}
