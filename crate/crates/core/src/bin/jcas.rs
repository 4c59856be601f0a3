use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use jcas::campaign::{
    ber_campaign, detection_campaign, draw_reference, improvement_ccdf, optimize_reference, psl_campaign, trial_rng,
    write_ber_csv, write_ccdf_csv, write_detection_csv, write_eta_trace_csv, write_grid_csv, write_psl_trials_csv,
    write_summary_csv, ExperimentConfig, Variant,
};
use jcas::oracle::verification_suite;
use jcas::Error;

#[derive(Parser)]
#[command(name = "jcas", about = "Low-sidelobe MIMO-OFDM data-symbol optimization")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML experiment config; defaults are used for anything missing.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    workers: Option<usize>,
    /// Repeat or comma-separate: original, optimized, orthogonal.
    #[arg(long, value_delimiter = ',')]
    variant: Vec<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Optimize one grid, or a batch with --trials.
    Optimize(Common),
    /// Detection probability versus SNR.
    Sense {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        pfa: Option<f64>,
        /// start:step:stop in dB.
        #[arg(long, allow_hyphen_values = true)]
        snr: Option<String>,
    },
    /// Zero-forcing bit error rate versus SNR.
    Ber {
        #[command(flatten)]
        common: Common,
        /// Comma-separated similarity factors.
        #[arg(long, value_delimiter = ',')]
        rho: Vec<f64>,
        #[arg(long, allow_hyphen_values = true)]
        snr: Option<String>,
    },
    /// Run the dense-oracle checks.
    Verify(Common),
}

fn parse_range(s: &str) -> Result<Vec<f64>, Error> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| Error::Config(format!("bad SNR range {s:?}: {e}")))?;
    match parts.as_slice() {
        [v] => Ok(vec![*v]),
        [a, step, b] if *step > 0.0 && b >= a => {
            let count = ((b - a) / step + 1e-9).floor() as usize;
            Ok((0..=count).map(|i| a + i as f64 * step).collect())
        }
        _ => Err(Error::Config(format!("bad SNR range {s:?}, want start:step:stop"))),
    }
}

fn load(common: &Common) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(t) = common.trials {
        cfg.trials = t;
    }
    if let Some(w) = common.workers {
        cfg.workers = w;
    }
    Ok(cfg)
}

fn variants(common: &Common, default: &[Variant]) -> Result<Vec<Variant>, Error> {
    if common.variant.is_empty() {
        return Ok(default.to_vec());
    }
    common.variant.iter().map(|v| v.parse()).collect()
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, Error> {
    std::fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.cmd {
        Cmd::Optimize(common) => {
            let cfg = load(&common)?;
            cfg.validate()?;
            if cfg.trials == 1 {
                let spec = cfg.waveform.spec()?;
                let mut rng = trial_rng(cfg.seed, 0);
                let reference = draw_reference(&mut rng, &cfg.waveform)?;
                let rep = optimize_reference(&reference, &spec, &cfg.waveform, &cfg.optimizer)?;
                write_grid_csv(create(&common.out, "waveform.csv")?, &rep.x_opt)?;
                write_eta_trace_csv(create(&common.out, "eta_trace.csv")?, &rep.eta_trace)?;
                write_summary_csv(create(&common.out, "summary.csv")?, &rep)?;
                println!(
                    "psl_before_db={:.3} psl_after_db={:.3} iterations={} stop={}",
                    rep.psl_db_before,
                    rep.psl_db_after,
                    rep.iterations_used,
                    rep.stop_reason.as_str()
                );
            } else {
                let rows = psl_campaign(&cfg)?;
                write_psl_trials_csv(create(&common.out, "psl_trials.csv")?, &rows)?;
                let ccdf = improvement_ccdf(&rows, 0.5);
                write_ccdf_csv(create(&common.out, "psl_ccdf.csv")?, &ccdf)?;
                let mut after: Vec<f64> = rows.iter().map(|r| r.psl_after_db).collect();
                after.sort_by(f64::total_cmp);
                let ge3 = rows.iter().filter(|r| r.improvement_db() >= 3.0).count();
                let le3 = rows.iter().filter(|r| r.iterations <= 3).count();
                println!(
                    "trials={} median_psl_after_db={:.3} improved_3db={:.3} within_3_iterations={:.3}",
                    rows.len(),
                    after[after.len() / 2],
                    ge3 as f64 / rows.len() as f64,
                    le3 as f64 / rows.len() as f64
                );
            }
            Ok(true)
        }
        Cmd::Sense { common, pfa, snr } => {
            let mut cfg = load(&common)?;
            if let Some(p) = pfa {
                cfg.sensing.cfar.pfa = p;
            }
            if let Some(s) = snr {
                cfg.sensing.snr_db = parse_range(&s)?;
            }
            cfg.validate()?;
            let vs = variants(&common, &[Variant::Original, Variant::Optimized, Variant::Orthogonal])?;
            let rows = detection_campaign(&cfg, &vs)?;
            write_detection_csv(create(&common.out, "detection.csv")?, &rows)?;
            write_detection_csv(std::io::stdout().lock(), &rows)?;
            Ok(true)
        }
        Cmd::Ber { common, rho, snr } => {
            let mut cfg = load(&common)?;
            if !rho.is_empty() {
                cfg.comms.rhos = rho;
            }
            if let Some(s) = snr {
                cfg.comms.snr_db = parse_range(&s)?;
            }
            cfg.validate()?;
            let vs = variants(&common, &[Variant::Original, Variant::Optimized])?;
            let rows = ber_campaign(&cfg, &vs)?;
            write_ber_csv(create(&common.out, "ber.csv")?, &rows)?;
            write_ber_csv(std::io::stdout().lock(), &rows)?;
            Ok(true)
        }
        Cmd::Verify(common) => {
            let cfg = load(&common)?;
            let results = verification_suite(cfg.seed)?;
            for r in &results {
                println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
            }
            Ok(results.iter().all(|r| r.passed))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
