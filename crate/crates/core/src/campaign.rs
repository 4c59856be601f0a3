//! Experiment configuration, seeding, Monte-Carlo drivers and CSV output.
//!
//! Seeding: trial `t` of a run with master seed `s` uses
//! `ChaCha8Rng::seed_from_u64(s)` on stream `t`. Draws that must be shared
//! between variants (noise, targets, the orthogonal grid) come from the same
//! stream with the block counter moved to `tag << 64`, so they do not depend
//! on which variants were requested. Results are collected in trial order and
//! reduced sequentially, which makes every output independent of the worker
//! count.

use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::comms::{channel_apply, zf_equalize, ChannelRealization};
use crate::constellation::{
    default_unused_count, demodulate, modulate, BitStream, ConstellationSpec, Family, SubcarrierMask,
};
use crate::optimizer::{optimize, OptimizationReport, OptimizerConfig, WaveformProblem};
use crate::sensing::{
    cfar_detect, matched_products, synthesize_echo, zero_angle_slice, CfarConfig, SensingScene, Target,
};
use crate::spectrum::{LagWeights, SymbolGrid};
use crate::{Error, Result};

const TAG_ORTHOGONAL: u64 = 1;
const TAG_TARGETS: u64 = 2;
const TAG_CHANNEL: u64 = 3;
const TAG_NOISE: u64 = 100;

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Independent sub-stream of a trial, keyed by `tag`.
pub fn trial_sub_rng(seed: u64, trial: u64, tag: u64) -> ChaCha8Rng {
    let mut rng = trial_rng(seed, trial);
    rng.set_word_pos((tag as u128) << 64);
    rng
}

/// Run `f(trial)` for every trial on a pool of `workers` threads (0 picks
/// the rayon default) and return the results in trial order.
pub fn run_trials<T, F>(trials: usize, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| (0..trials).into_par_iter().map(&f).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskPolicy {
    Random,
    Edge,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaveformConfig {
    pub n: usize,
    pub m: usize,
    pub n_cp: usize,
    pub family: Family,
    pub order: u32,
    pub rho: f64,
    pub eps_a: f64,
    /// Idle sub-carriers per antenna; `round(0.05 N)` when absent.
    pub unused: Option<usize>,
    pub mask: MaskPolicy,
}

impl Default for WaveformConfig {
    fn default() -> Self {
        Self {
            n: 128,
            m: 4,
            n_cp: 32,
            family: Family::Psk,
            order: 4,
            rho: 0.15,
            eps_a: 0.2,
            unused: None,
            mask: MaskPolicy::Random,
        }
    }
}

impl WaveformConfig {
    pub fn spec(&self) -> Result<ConstellationSpec> {
        ConstellationSpec::new(self.family, self.order, self.rho, self.eps_a)
    }

    pub fn weights(&self) -> Result<LagWeights> {
        LagWeights::cyclic_prefix(self.n, self.n_cp)
    }

    pub fn unused_count(&self) -> usize {
        self.unused.unwrap_or_else(|| default_unused_count(self.n))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.m < 1 {
            return Err(Error::InvalidParameter("need N >= 2 and M >= 1".into()));
        }
        if self.n_cp < 2 || self.n_cp > self.n {
            return Err(Error::InvalidParameter(format!(
                "N_CP = {} must lie in [2, N]",
                self.n_cp
            )));
        }
        if self.unused_count() >= self.n {
            return Err(Error::InvalidParameter("no used sub-carriers left".into()));
        }
        self.spec().map(|_| ())
    }

    pub fn draw_mask<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SubcarrierMask> {
        match self.mask {
            MaskPolicy::Random => SubcarrierMask::random(rng, self.n, self.m, self.unused_count()),
            MaskPolicy::Edge => SubcarrierMask::edge_guard(self.n, self.m, self.unused_count()),
        }
    }
}

/// Random data grid with its bits and mask.
#[derive(Clone, Debug)]
pub struct Reference {
    pub bits: BitStream,
    pub mask: SubcarrierMask,
    pub grid: SymbolGrid,
}

pub fn draw_reference<R: Rng + ?Sized>(rng: &mut R, wave: &WaveformConfig) -> Result<Reference> {
    let spec = wave.spec()?;
    let mask = wave.draw_mask(rng)?;
    let bits = BitStream::random(rng, spec.bits_per_symbol() * mask.used_count());
    let grid = modulate(&bits, &spec, &mask)?;
    Ok(Reference { bits, mask, grid })
}

pub fn optimize_reference(
    reference: &Reference,
    spec: &ConstellationSpec,
    wave: &WaveformConfig,
    opt: &OptimizerConfig,
) -> Result<OptimizationReport> {
    let problem = WaveformProblem::new(reference.grid.clone(), reference.mask.clone(), *spec, wave.weights()?)?;
    optimize(problem, opt.clone())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Original,
    Optimized,
    Orthogonal,
}

impl Variant {
    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Original => "original",
            Variant::Optimized => "optimized",
            Variant::Orthogonal => "orthogonal",
        }
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "original" => Ok(Variant::Original),
            "optimized" => Ok(Variant::Optimized),
            "orthogonal" => Ok(Variant::Orthogonal),
            other => Err(Error::Config(format!("unknown variant {other:?}"))),
        }
    }
}

/// How campaign target delays are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetPlacement {
    /// Evenly spread centres from 0.5 to `N_CP - 1.5`, +-0.5 bin jitter.
    Even,
    /// Independent uniform delays in `[0, N_CP - 1)`.
    Uniform,
}

/// Delays for `k` targets.
pub fn target_delays<R: Rng + ?Sized>(rng: &mut R, placement: TargetPlacement, k: usize, n_cp: usize) -> Vec<f64> {
    let span = (n_cp - 1) as f64;
    match placement {
        TargetPlacement::Uniform => (0..k).map(|_| rng.random_range(0.0..span)).collect(),
        TargetPlacement::Even if k == 1 => vec![rng.random_range(0.0..span)],
        TargetPlacement::Even => {
            let step = (span - 1.0) / (k - 1) as f64;
            (0..k)
                .map(|i| 0.5 + i as f64 * step + rng.random_range(-0.5..0.5))
                .collect()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensingConfig {
    pub targets: usize,
    pub placement: TargetPlacement,
    pub snr_db: Vec<f64>,
    /// Detections within this many range bins of a target count as hits.
    pub credit_bins: usize,
    /// Range oversampling of the zero-angle slice that CFAR scans.
    pub detect_os: usize,
    pub os_range: usize,
    pub os_angle: usize,
    pub cfar: CfarConfig,
}

impl Default for SensingConfig {
    fn default() -> Self {
        Self {
            targets: 5,
            placement: TargetPlacement::Even,
            snr_db: (-20..=4).step_by(2).map(f64::from).collect(),
            credit_bins: 1,
            detect_os: 2,
            os_range: 8,
            os_angle: 8,
            cfar: CfarConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CommsConfig {
    pub receive_antennas: usize,
    pub rhos: Vec<f64>,
    pub snr_db: Vec<f64>,
}

impl Default for CommsConfig {
    fn default() -> Self {
        Self {
            receive_antennas: 4,
            rhos: vec![0.15, 0.25],
            snr_db: (0..=32).step_by(2).map(f64::from).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub trials: usize,
    /// 0 uses one worker per core.
    pub workers: usize,
    pub waveform: WaveformConfig,
    pub optimizer: OptimizerConfig,
    pub sensing: SensingConfig,
    pub comms: CommsConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            trials: 1,
            workers: 0,
            waveform: WaveformConfig::default(),
            optimizer: OptimizerConfig::default(),
            sensing: SensingConfig::default(),
            comms: CommsConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let wrap = |e: Error| Error::Config(e.to_string());
        self.waveform.validate().map_err(wrap)?;
        self.optimizer.validate().map_err(wrap)?;
        self.sensing.cfar.validate().map_err(wrap)?;
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if self.comms.receive_antennas < self.waveform.m {
            return Err(Error::Config(format!(
                "{} receive antennas cannot separate {} streams",
                self.comms.receive_antennas, self.waveform.m
            )));
        }
        for &rho in &self.comms.rhos {
            self.waveform.spec().and_then(|s| s.with_rho(rho)).map_err(wrap)?;
        }
        if self.sensing.os_range == 0 || self.sensing.os_angle == 0 || self.sensing.detect_os == 0 {
            return Err(Error::Config("oversampling factors must be >= 1".into()));
        }
        let span = 2 * (self.sensing.cfar.n_ref + self.sensing.cfar.n_gap) + 1;
        if span > self.waveform.n * self.sensing.detect_os {
            return Err(Error::Config(format!(
                "CFAR window {span} exceeds the {} slice cells",
                self.waveform.n * self.sensing.detect_os
            )));
        }
        Ok(())
    }
}

/// One row of a PSL campaign.
#[derive(Clone, Debug)]
pub struct PslTrial {
    pub trial: usize,
    pub psl_before_db: f64,
    pub psl_after_db: f64,
    pub iterations: usize,
    pub stop_reason: &'static str,
}

impl PslTrial {
    pub fn improvement_db(&self) -> f64 {
        self.psl_before_db - self.psl_after_db
    }
}

pub fn psl_campaign(cfg: &ExperimentConfig) -> Result<Vec<PslTrial>> {
    let spec = cfg.waveform.spec()?;
    run_trials(cfg.trials, cfg.workers, |t| {
        let mut rng = trial_rng(cfg.seed, t as u64);
        let reference = draw_reference(&mut rng, &cfg.waveform)?;
        let rep = optimize_reference(&reference, &spec, &cfg.waveform, &cfg.optimizer)?;
        Ok(PslTrial {
            trial: t,
            psl_before_db: rep.psl_db_before,
            psl_after_db: rep.psl_db_after,
            iterations: rep.iterations_used,
            stop_reason: rep.stop_reason.as_str(),
        })
    })
}

/// Fraction of trials whose improvement is at least each threshold.
pub fn improvement_ccdf(trials: &[PslTrial], step_db: f64) -> Vec<(f64, f64)> {
    let imp: Vec<f64> = trials.iter().map(PslTrial::improvement_db).collect();
    let top = imp.iter().cloned().fold(0.0, f64::max);
    let steps = (top / step_db).ceil() as usize + 1;
    (0..=steps)
        .map(|s| {
            let th = s as f64 * step_db;
            let frac = imp.iter().filter(|v| **v >= th).count() as f64 / imp.len().max(1) as f64;
            (th, frac)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectionPoint {
    pub snr_db: f64,
    pub variant: Variant,
    pub dp: f64,
    pub trials: usize,
}

fn variant_grids(
    cfg: &ExperimentConfig,
    spec: &ConstellationSpec,
    variants: &[Variant],
    reference: &Reference,
    trial: u64,
) -> Result<Vec<(SymbolGrid, SubcarrierMask)>> {
    variants
        .iter()
        .map(|v| match v {
            Variant::Original => Ok((reference.grid.clone(), reference.mask.clone())),
            Variant::Optimized => {
                let rep = optimize_reference(reference, spec, &cfg.waveform, &cfg.optimizer)?;
                Ok((rep.x_opt, reference.mask.clone()))
            }
            Variant::Orthogonal => {
                let mut rng = trial_sub_rng(cfg.seed, trial, TAG_ORTHOGONAL);
                let mask = SubcarrierMask::interleaved(cfg.waveform.n, cfg.waveform.m);
                let bits = BitStream::random(&mut rng, spec.bits_per_symbol() * mask.used_count());
                Ok((modulate(&bits, spec, &mask)?, mask))
            }
        })
        .collect()
}

/// Detection probability per SNR and variant. Targets sit at zero angle
/// with delays from [`target_delays`] and random phases; noise power is
/// set from each waveform's own energy per sub-carrier.
pub fn detection_campaign(cfg: &ExperimentConfig, variants: &[Variant]) -> Result<Vec<DetectionPoint>> {
    cfg.validate()?;
    let spec = cfg.waveform.spec()?;
    let sens = &cfg.sensing;
    let n = cfg.waveform.n;
    let n_cp = cfg.waveform.n_cp;
    let os = sens.detect_os;
    let cells = (os * n) as isize;
    let per_trial = run_trials(cfg.trials, cfg.workers, |t| {
        let tt = t as u64;
        let mut rng = trial_rng(cfg.seed, tt);
        let reference = draw_reference(&mut rng, &cfg.waveform)?;
        let grids = variant_grids(cfg, &spec, variants, &reference, tt)?;
        let mut trng = trial_sub_rng(cfg.seed, tt, TAG_TARGETS);
        let targets: Vec<Target> = target_delays(&mut trng, sens.placement, sens.targets, n_cp)
            .into_iter()
            .map(|tau| Target {
                alpha: Complex64::from_polar(1.0, trng.random_range(0.0..std::f64::consts::TAU)),
                tau,
                theta: 0.0,
            })
            .collect();
        let mut hits = vec![vec![0usize; variants.len()]; sens.snr_db.len()];
        for (si, snr) in sens.snr_db.iter().enumerate() {
            for (vi, (grid, _)) in grids.iter().enumerate() {
                let mut nrng = trial_sub_rng(cfg.seed, tt, TAG_NOISE + si as u64);
                let scene = SensingScene {
                    targets: targets.clone(),
                    noise_power: grid.energy() / n as f64 / 10f64.powf(snr / 10.0),
                    cp_len: n_cp,
                };
                let y = synthesize_echo(grid, &scene, &mut nrng)?;
                let profile = zero_angle_slice(&matched_products(&y, grid)?, os)?;
                let det = cfar_detect(&profile, &sens.cfar)?;
                let c = (sens.credit_bins * os) as isize;
                hits[si][vi] = targets
                    .iter()
                    .filter(|tg| {
                        let centre = tg.tau.round() as isize * os as isize;
                        (-c..=c).any(|d| det[(centre + d).rem_euclid(cells) as usize])
                    })
                    .count();
            }
        }
        Ok(hits)
    })?;
    let denom = (cfg.trials * sens.targets).max(1) as f64;
    let mut out = Vec::new();
    for (si, snr) in sens.snr_db.iter().enumerate() {
        for (vi, v) in variants.iter().enumerate() {
            let total: usize = per_trial.iter().map(|h| h[si][vi]).sum();
            out.push(DetectionPoint {
                snr_db: *snr,
                variant: *v,
                dp: total as f64 / denom,
                trials: cfg.trials,
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BerPoint {
    pub snr_db: f64,
    pub variant: Variant,
    /// Similarity factor of the optimized grid; 0 for unperturbed variants.
    pub rho: f64,
    pub ber: f64,
    pub errors: usize,
    pub bits: usize,
    pub trials: usize,
}

/// Zero-forcing BER per SNR, variant and similarity factor. SNR is the mean
/// reference-constellation symbol energy over the per-antenna noise power.
pub fn ber_campaign(cfg: &ExperimentConfig, variants: &[Variant]) -> Result<Vec<BerPoint>> {
    cfg.validate()?;
    let spec = cfg.waveform.spec()?;
    let es = spec.mean_energy();
    let comms = &cfg.comms;
    let mut slots: Vec<(Variant, f64)> = Vec::new();
    for v in variants {
        match v {
            Variant::Optimized => slots.extend(comms.rhos.iter().map(|r| (*v, *r))),
            _ => slots.push((*v, 0.0)),
        }
    }
    let per_trial = run_trials(cfg.trials, cfg.workers, |t| {
        let tt = t as u64;
        let mut rng = trial_rng(cfg.seed, tt);
        let reference = draw_reference(&mut rng, &cfg.waveform)?;
        let mut crng = trial_sub_rng(cfg.seed, tt, TAG_CHANNEL);
        let mut chan = ChannelRealization::draw(&mut crng, comms.receive_antennas, cfg.waveform.m, 0.0)?;
        let mut tx: Vec<(SymbolGrid, SubcarrierMask, BitStream)> = Vec::with_capacity(slots.len());
        for (v, rho) in &slots {
            match v {
                Variant::Original => tx.push((reference.grid.clone(), reference.mask.clone(), reference.bits.clone())),
                Variant::Optimized => {
                    let s = spec.with_rho(*rho)?;
                    let rep = optimize_reference(&reference, &s, &cfg.waveform, &cfg.optimizer)?;
                    tx.push((rep.x_opt, reference.mask.clone(), reference.bits.clone()));
                }
                Variant::Orthogonal => {
                    let mut orng = trial_sub_rng(cfg.seed, tt, TAG_ORTHOGONAL);
                    let mask = SubcarrierMask::interleaved(cfg.waveform.n, cfg.waveform.m);
                    let bits = BitStream::random(&mut orng, spec.bits_per_symbol() * mask.used_count());
                    tx.push((modulate(&bits, &spec, &mask)?, mask, bits));
                }
            }
        }
        let mut errors = vec![vec![0usize; slots.len()]; comms.snr_db.len()];
        for (si, snr) in comms.snr_db.iter().enumerate() {
            chan.noise_power = es / 10f64.powf(snr / 10.0);
            for (ki, (grid, mask, bits)) in tx.iter().enumerate() {
                let mut nrng = trial_sub_rng(cfg.seed, tt, TAG_NOISE + si as u64);
                let rx = channel_apply(grid, &chan, &mut nrng)?;
                let xh = zf_equalize(&rx, &chan)?;
                errors[si][ki] = demodulate(&xh, &spec, mask)?.bit_errors(bits);
            }
        }
        let bits: Vec<usize> = tx.iter().map(|(_, _, b)| b.len()).collect();
        Ok((errors, bits))
    })?;
    let mut out = Vec::new();
    for (si, snr) in comms.snr_db.iter().enumerate() {
        for (ki, (v, rho)) in slots.iter().enumerate() {
            let errors: usize = per_trial.iter().map(|(e, _)| e[si][ki]).sum();
            let bits: usize = per_trial.iter().map(|(_, b)| b[ki]).sum();
            out.push(BerPoint {
                snr_db: *snr,
                variant: *v,
                rho: *rho,
                ber: errors as f64 / bits.max(1) as f64,
                errors,
                bits,
                trials: cfg.trials,
            });
        }
    }
    Ok(out)
}

/// SNR at which a curve first crosses `level`, linearly interpolated.
/// With `log_scale` the values are interpolated in `log10`. Points must be
/// sorted by SNR.
pub fn crossing_snr(curve: &[(f64, f64)], level: f64, log_scale: bool) -> Option<f64> {
    let tf = |v: f64| if log_scale { v.max(1e-300).log10() } else { v };
    let target = tf(level);
    curve.windows(2).find_map(|w| {
        let (s0, v0) = (w[0].0, tf(w[0].1));
        let (s1, v1) = (w[1].0, tf(w[1].1));
        if (v0 - target) * (v1 - target) <= 0.0 && v0 != v1 {
            Some(s0 + (target - v0) * (s1 - s0) / (v1 - v0))
        } else if v0 == target {
            Some(s0)
        } else {
            None
        }
    })
}

pub fn write_grid_csv<W: Write>(mut w: W, grid: &SymbolGrid) -> Result<()> {
    writeln!(w, "antenna,subcarrier,re,im")?;
    for m in 0..grid.m() {
        for n in 0..grid.n() {
            let z = grid.get(n, m);
            writeln!(w, "{m},{n},{},{}", z.re, z.im)?;
        }
    }
    Ok(())
}

pub fn write_eta_trace_csv<W: Write>(mut w: W, trace: &[f64]) -> Result<()> {
    writeln!(w, "iteration,eta")?;
    for (i, e) in trace.iter().enumerate() {
        writeln!(w, "{i},{e}")?;
    }
    Ok(())
}

pub fn write_summary_csv<W: Write>(mut w: W, rep: &OptimizationReport) -> Result<()> {
    writeln!(w, "psl_before_db,psl_after_db,iterations")?;
    writeln!(w, "{},{},{}", rep.psl_db_before, rep.psl_db_after, rep.iterations_used)?;
    Ok(())
}

pub fn write_psl_trials_csv<W: Write>(mut w: W, rows: &[PslTrial]) -> Result<()> {
    writeln!(
        w,
        "trial,psl_before_db,psl_after_db,improvement_db,iterations,stop_reason"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.trial,
            r.psl_before_db,
            r.psl_after_db,
            r.improvement_db(),
            r.iterations,
            r.stop_reason
        )?;
    }
    Ok(())
}

pub fn write_ccdf_csv<W: Write>(mut w: W, rows: &[(f64, f64)]) -> Result<()> {
    writeln!(w, "improvement_db,fraction_at_least")?;
    for (th, f) in rows {
        writeln!(w, "{th},{f}")?;
    }
    Ok(())
}

pub fn write_detection_csv<W: Write>(mut w: W, rows: &[DetectionPoint]) -> Result<()> {
    writeln!(w, "snr_db,variant,dp,trials")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", r.snr_db, r.variant.as_str(), r.dp, r.trials)?;
    }
    Ok(())
}

pub fn write_ber_csv<W: Write>(mut w: W, rows: &[BerPoint]) -> Result<()> {
    writeln!(w, "snr_db,variant,rho,ber,trials")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.snr_db,
            r.variant.as_str(),
            r.rho,
            r.ber,
            r.trials
        )?;
    }
    Ok(())
}
