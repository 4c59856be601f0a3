//! Detection probability versus SNR for the three waveforms, with the SNR
//! each needs for DP = 0.85.
//!
//! cargo run --release --example detection_probability -- [trials]

use jcas::campaign::{crossing_snr, detection_campaign, ExperimentConfig, Variant};

fn main() -> jcas::Result<()> {
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200);
    let cfg = ExperimentConfig {
        trials,
        ..Default::default()
    };
    let variants = [Variant::Original, Variant::Optimized, Variant::Orthogonal];
    let rows = detection_campaign(&cfg, &variants)?;

    println!("snr_db  {}", variants.map(|v| format!("{:>10}", v.as_str())).join(" "));
    for snr in &cfg.sensing.snr_db {
        let dps: Vec<String> = variants
            .iter()
            .map(|v| {
                let r = rows.iter().find(|r| r.variant == *v && r.snr_db == *snr).unwrap();
                format!("{:>10.3}", r.dp)
            })
            .collect();
        println!("{snr:6.1}  {}", dps.join(" "));
    }
    for v in variants {
        let curve: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.variant == v)
            .map(|r| (r.snr_db, r.dp))
            .collect();
        match crossing_snr(&curve, 0.85, false) {
            Some(s) => println!("{:10} DP 0.85 at {s:.2} dB", v.as_str()),
            None => println!("{:10} never reaches DP 0.85", v.as_str()),
        }
    }
    Ok(())
}
