//! CA-CFAR on the zero-angle range slice of a noisy five-target echo.
//!
//! cargo run --release --example cfar_detection -- [snr_db]

use jcas::campaign::{draw_reference, target_delays, trial_rng, TargetPlacement, WaveformConfig};
use jcas::sensing::{
    cfar_detect, cfar_threshold_factor, matched_products, synthesize_echo, zero_angle_slice, CfarConfig, SensingScene,
    Target,
};
use jcas::Complex64;

fn main() -> jcas::Result<()> {
    let snr_db: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.0);
    let wave = WaveformConfig::default();
    let mut rng = trial_rng(5, 0);
    let grid = draw_reference(&mut rng, &wave)?.grid;
    let cfar = CfarConfig::default();
    let os = 2;

    let delays = target_delays(&mut rng, TargetPlacement::Even, 5, wave.n_cp);
    let scene = SensingScene {
        targets: delays
            .iter()
            .map(|&tau| Target {
                alpha: Complex64::new(1.0, 0.0),
                tau,
                theta: 0.0,
            })
            .collect(),
        noise_power: grid.energy() / wave.n as f64 / 10f64.powf(snr_db / 10.0),
        cp_len: wave.n_cp,
    };
    let y = synthesize_echo(&grid, &scene, &mut rng)?;
    let profile = zero_angle_slice(&matched_products(&y, &grid)?, os)?;
    let hits = cfar_detect(&profile, &cfar)?;

    println!(
        "beta = {:.4}, P_fa = {}, SNR = {snr_db} dB",
        cfar_threshold_factor(&cfar)?,
        cfar.pfa
    );
    println!(
        "targets at {:?}",
        delays.iter().map(|t| format!("{t:.2}")).collect::<Vec<_>>()
    );
    let cells: Vec<String> = hits
        .iter()
        .enumerate()
        .filter(|(_, &h)| h)
        .map(|(c, _)| format!("{:.1}", c as f64 / os as f64))
        .collect();
    println!("detections at range bins {cells:?}");
    Ok(())
}
