//! Zero-forcing BER of the original and optimized grids for two similarity
//! factors.
//!
//! cargo run --release --example ber_zero_forcing -- [trials]

use jcas::campaign::{ber_campaign, crossing_snr, ExperimentConfig, Variant};

fn main() -> jcas::Result<()> {
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let cfg = ExperimentConfig {
        trials,
        ..Default::default()
    };
    let rows = ber_campaign(&cfg, &[Variant::Original, Variant::Optimized])?;

    let mut slots: Vec<(Variant, f64)> = Vec::new();
    for r in &rows {
        if !slots.contains(&(r.variant, r.rho)) {
            slots.push((r.variant, r.rho));
        }
    }
    for (v, rho) in slots {
        let curve: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.variant == v && r.rho == rho)
            .map(|r| (r.snr_db, r.ber))
            .collect();
        let at = crossing_snr(&curve, 1e-3, true).map_or("-".into(), |s| format!("{s:.2} dB"));
        let label = match v {
            Variant::Original => "original".to_string(),
            _ => format!("{} rho={rho}", v.as_str()),
        };
        println!("{label}: BER 1e-3 at {at}");
        for (snr, ber) in curve {
            println!("  {snr:5.1} dB  {ber:.3e}");
        }
    }
    Ok(())
}
