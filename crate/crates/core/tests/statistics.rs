use jcas::campaign::{ber_campaign, trial_rng, CommsConfig, ExperimentConfig, Variant, WaveformConfig};
use jcas::sensing::{cfar_detect, CfarConfig};
use rand::Rng;
use rand_distr::Exp1;
use statrs::distribution::{Binomial, DiscreteCDF};

/// The centre cell of independent noise-only windows raises a false alarm
/// with probability exactly `P_fa`.
#[test]
fn cfar_false_alarms_follow_binomial() {
    let cfg = CfarConfig {
        pfa: 1e-2,
        n_ref: 7,
        n_gap: 1,
    };
    let span = 2 * (cfg.n_ref + cfg.n_gap) + 1;
    let windows = 200_000u64;
    let mut rng = trial_rng(42, 0);
    let mut profile = vec![0.0; span];
    let mut alarms = 0u64;
    for _ in 0..windows {
        for p in profile.iter_mut() {
            *p = rng.sample(Exp1);
        }
        if cfar_detect(&profile, &cfg).unwrap()[0] {
            alarms += 1;
        }
    }
    let dist = Binomial::new(cfg.pfa, windows).unwrap();
    let (lo, hi) = (dist.inverse_cdf(1e-4), dist.inverse_cdf(1.0 - 1e-4));
    assert!(
        (lo..=hi).contains(&alarms),
        "{alarms} false alarms outside [{lo}, {hi}]"
    );
}

/// Single-antenna QPSK over flat Rayleigh fading:
/// `BER = (1 - sqrt(g / (1 + g))) / 2` with `g = SNR / 2` per bit.
#[test]
fn zero_forcing_ber_matches_rayleigh_closed_form() {
    let snr_db = vec![5.0, 10.0, 15.0];
    let cfg = ExperimentConfig {
        seed: 9,
        trials: 4000,
        waveform: WaveformConfig {
            n: 16,
            m: 1,
            n_cp: 4,
            unused: Some(0),
            ..Default::default()
        },
        comms: CommsConfig {
            receive_antennas: 1,
            rhos: vec![],
            snr_db: snr_db.clone(),
        },
        ..Default::default()
    };
    let rows = ber_campaign(&cfg, &[Variant::Original]).unwrap();
    for (row, snr) in rows.iter().zip(&snr_db) {
        let g = 10f64.powf(snr / 10.0) / 2.0;
        let expect = 0.5 * (1.0 - (g / (1.0 + g)).sqrt());
        let rel = (row.ber - expect).abs() / expect;
        assert!(rel < 0.1, "SNR {snr} dB: BER {} vs {expect} (rel {rel:.3})", row.ber);
    }
}
