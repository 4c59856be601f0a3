use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn jcas(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jcas"))
        .args(args)
        .output()
        .expect("spawn jcas")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("jcas-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn verify_succeeds() {
    let out = jcas(&["verify", "--seed", "3"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout)
        .lines()
        .all(|l| l.starts_with("PASS")));
}

#[test]
fn config_errors_exit_one() {
    let dir = scratch("bad");
    let missing = dir.join("missing.toml");
    assert_eq!(code(&jcas(&["optimize", "--config", missing.to_str().unwrap()])), 1);

    let unknown = dir.join("unknown.toml");
    std::fs::write(&unknown, "seed = 1\nbogus = 2\n").unwrap();
    assert_eq!(code(&jcas(&["optimize", "--config", unknown.to_str().unwrap()])), 1);

    let invalid = dir.join("invalid.toml");
    std::fs::write(&invalid, "[waveform]\nn_cp = 0\n").unwrap();
    assert_eq!(code(&jcas(&["optimize", "--config", invalid.to_str().unwrap()])), 1);

    assert_eq!(code(&jcas(&["sense", "--variant", "nonsense", "--trials", "1"])), 1);
    assert_eq!(code(&jcas(&["ber", "--snr", "10:-1:0"])), 1);
    assert_eq!(code(&jcas(&["frobnicate"])), 1);
}

#[test]
fn optimize_writes_outputs() {
    let dir = scratch("opt");
    let out = jcas(&["optimize", "--seed", "5", "--out", dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["waveform.csv", "eta_trace.csv", "summary.csv"] {
        assert!(dir.join(f).is_file(), "{f} missing");
    }
    let grid = std::fs::read_to_string(dir.join("waveform.csv")).unwrap();
    assert_eq!(grid.lines().count(), 1 + 128 * 4);
}

fn run_sense(dir: &Path, workers: &str) -> String {
    let out = jcas(&[
        "sense",
        "--seed",
        "8",
        "--trials",
        "6",
        "--workers",
        workers,
        "--snr",
        "-6:3:0",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::read_to_string(dir.join("detection.csv")).unwrap()
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let one = run_sense(&scratch("w1"), "1");
    let three = run_sense(&scratch("w3"), "3");
    assert_eq!(one, three);
    assert_eq!(one.lines().count(), 1 + 3 * 3);

    let ber = |w: &str| {
        let dir = scratch(&format!("ber{w}"));
        let out = jcas(&[
            "ber",
            "--seed",
            "2",
            "--trials",
            "4",
            "--workers",
            w,
            "--snr",
            "10",
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0);
        std::fs::read_to_string(dir.join("ber.csv")).unwrap()
    };
    assert_eq!(ber("1"), ber("2"));
}

#[test]
fn sample_config_matches_defaults() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/default.toml");
    let cfg = jcas::campaign::ExperimentConfig::load(&path).unwrap();
    assert_eq!(cfg, jcas::campaign::ExperimentConfig::default());
}
