//! Mono-static echo model, matched filtering, range-angle maps and CA-CFAR.
//!
//! Steering vectors: `a_m(θ) = e^{-jπ m sin θ}` across the half-wavelength
//! array and `b_n(τ) = e^{-j2πnτ/N}` across sub-carriers, so the echo is
//! `y = sum_q α_q (X a(θ_q)) ⊙ b(τ_q) + noise`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::spectrum::{SymbolGrid, Transform};
use crate::{Error, Result};

pub fn angle_steering(theta: f64, m: usize) -> Vec<Complex64> {
    (0..m)
        .map(|a| Complex64::from_polar(1.0, -PI * a as f64 * theta.sin()))
        .collect()
}

pub fn range_steering(tau: f64, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|i| Complex64::from_polar(1.0, -2.0 * PI * i as f64 * tau / n as f64))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Target {
    pub alpha: Complex64,
    /// Delay in samples, `0 <= tau < N_CP`.
    pub tau: f64,
    /// Angle of departure in radians.
    pub theta: f64,
}

#[derive(Clone, Debug)]
pub struct SensingScene {
    pub targets: Vec<Target>,
    pub noise_power: f64,
    pub cp_len: usize,
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, power: f64) -> Complex64 {
    let s = (power / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * s, im * s)
}

/// Received frequency-domain echo, one sample per sub-carrier.
pub fn synthesize_echo<R: Rng + ?Sized>(
    grid: &SymbolGrid,
    scene: &SensingScene,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    if scene.noise_power.is_nan() || scene.noise_power < 0.0 {
        return Err(Error::InvalidParameter("noise power must be >= 0".into()));
    }
    let (n, m) = (grid.n(), grid.m());
    let mut y = vec![Complex64::new(0.0, 0.0); n];
    for t in &scene.targets {
        if !(t.tau >= 0.0 && t.tau <= scene.cp_len as f64) {
            return Err(Error::InvalidParameter(format!(
                "delay {} outside [0, {}]",
                t.tau, scene.cp_len
            )));
        }
        let a = angle_steering(t.theta, m);
        let b = range_steering(t.tau, n);
        for (i, yi) in y.iter_mut().enumerate() {
            let s: Complex64 = (0..m).map(|k| grid.get(i, k) * a[k]).sum();
            *yi += t.alpha * s * b[i];
        }
    }
    if scene.noise_power > 0.0 {
        for yi in y.iter_mut() {
            *yi += complex_gaussian(rng, scene.noise_power);
        }
    }
    Ok(y)
}

/// `y ⊙ conj(x_m)` per antenna, before any transform.
pub fn matched_products(y: &[Complex64], grid: &SymbolGrid) -> Result<SymbolGrid> {
    if y.len() != grid.n() {
        return Err(Error::Dimension(format!("echo length {} != N = {}", y.len(), grid.n())));
    }
    let mut out = SymbolGrid::zeros(grid.n(), grid.m());
    for k in 0..grid.m() {
        for (o, (yi, xi)) in out.column_mut(k).iter_mut().zip(y.iter().zip(grid.column(k))) {
            *o = yi * xi.conj();
        }
    }
    Ok(out)
}

/// `Z[:, m] = idft(y ⊙ conj(x_m))`.
pub fn matched_filter(y: &[Complex64], grid: &SymbolGrid) -> Result<SymbolGrid> {
    let mut z = matched_products(y, grid)?;
    let tr = Transform::new(grid.n());
    let s = 1.0 / grid.n() as f64;
    for k in 0..grid.m() {
        let col = z.column_mut(k);
        tr.backward(col);
        col.iter_mut().for_each(|v| *v *= s);
    }
    Ok(z)
}

/// Coherent antenna sum of the matched-filter outputs: the zero-angle range
/// profile, as power.
pub fn zero_angle_profile(z: &SymbolGrid) -> Vec<f64> {
    (0..z.n())
        .map(|i| (0..z.m()).map(|k| z.get(i, k)).sum::<Complex64>().norm_sqr())
        .collect()
}

/// Zero-angle power profile on a range axis oversampled by `os`
/// (zero-padded IDFT of the antenna-summed matched products, `1/N` scale).
/// `os = 1` matches [`zero_angle_profile`] of [`matched_filter`].
pub fn zero_angle_slice(products: &SymbolGrid, os: usize) -> Result<Vec<f64>> {
    if os == 0 {
        return Err(Error::InvalidParameter("oversampling factor must be >= 1".into()));
    }
    let n = products.n();
    let mut buf = vec![Complex64::new(0.0, 0.0); os * n];
    for (i, b) in buf.iter_mut().take(n).enumerate() {
        *b = (0..products.m()).map(|k| products.get(i, k)).sum();
    }
    Transform::new(os * n).backward(&mut buf);
    let s = 1.0 / n as f64;
    Ok(buf.iter().map(|v| (v * s).norm_sqr()).collect())
}

/// Magnitude map: rows are range cells (`os_r N`), columns angle cells
/// (`os_a M`, cell `q` looks at `sin θ = 2q / (os_a M)`, wrapped).
#[derive(Clone, Debug)]
pub struct RangeAngleMap {
    pub range_cells: usize,
    pub angle_cells: usize,
    /// Row-major magnitudes.
    pub values: Vec<f64>,
}

impl RangeAngleMap {
    pub fn get(&self, range: usize, angle: usize) -> f64 {
        self.values[range * self.angle_cells + angle]
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "range_cell")?;
        for q in 0..self.angle_cells {
            write!(w, ",angle_{q}")?;
        }
        writeln!(w)?;
        for r in 0..self.range_cells {
            write!(w, "{r}")?;
            for q in 0..self.angle_cells {
                write!(w, ",{}", self.get(r, q))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Oversampled range-angle map from the matched products: each antenna
/// column is zero padded to `os_r N` and inverse transformed, then each range
/// row is zero padded to `os_a M` and inverse transformed.
pub fn range_angle_map(products: &SymbolGrid, os_r: usize, os_a: usize) -> Result<RangeAngleMap> {
    if os_r == 0 || os_a == 0 {
        return Err(Error::InvalidParameter("oversampling factors must be >= 1".into()));
    }
    let (n, m) = (products.n(), products.m());
    let (lr, la) = (os_r * n, os_a * m);
    let tr = Transform::new(lr);
    let ta = Transform::new(la);
    let mut cols = vec![Complex64::new(0.0, 0.0); lr * m];
    for k in 0..m {
        let col = &mut cols[k * lr..(k + 1) * lr];
        col[..n].copy_from_slice(products.column(k));
        tr.backward(col);
    }
    let scale = 1.0 / (lr * la) as f64;
    let mut values = vec![0.0; lr * la];
    let mut row = vec![Complex64::new(0.0, 0.0); la];
    for r in 0..lr {
        row.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for k in 0..m {
            row[k] = cols[k * lr + r];
        }
        ta.backward(&mut row);
        for (q, v) in row.iter().enumerate() {
            values[r * la + q] = v.norm() * scale;
        }
    }
    Ok(RangeAngleMap {
        range_cells: lr,
        angle_cells: la,
        values,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CfarConfig {
    pub pfa: f64,
    /// Reference cells on each side.
    pub n_ref: usize,
    /// Guard cells on each side.
    pub n_gap: usize,
}

impl Default for CfarConfig {
    fn default() -> Self {
        Self {
            pfa: 1e-4,
            n_ref: 7,
            n_gap: 1,
        }
    }
}

impl CfarConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.pfa > 0.0 && self.pfa < 1.0) {
            return Err(Error::InvalidParameter(format!("P_fa = {} outside (0, 1)", self.pfa)));
        }
        if self.n_ref == 0 {
            return Err(Error::InvalidParameter("N_ref must be >= 1".into()));
        }
        Ok(())
    }
}

/// `beta = 2 N_ref (P_fa^(-1 / (2 N_ref)) - 1)` for exponentially
/// distributed noise power.
pub fn cfar_threshold_factor(cfg: &CfarConfig) -> Result<f64> {
    cfg.validate()?;
    let k = 2.0 * cfg.n_ref as f64;
    Ok(k * (cfg.pfa.powf(-1.0 / k) - 1.0))
}

/// Cell-averaging CFAR over a power profile with cyclic windows.
pub fn cfar_detect(profile: &[f64], cfg: &CfarConfig) -> Result<Vec<bool>> {
    let beta = cfar_threshold_factor(cfg)?;
    let len = profile.len();
    let span = 2 * (cfg.n_ref + cfg.n_gap) + 1;
    if len < span {
        return Err(Error::InvalidParameter(format!(
            "profile of {len} cells shorter than window {span}"
        )));
    }
    let k = 2.0 * cfg.n_ref as f64;
    Ok((0..len)
        .map(|i| {
            let noise: f64 = (cfg.n_gap + 1..=cfg.n_gap + cfg.n_ref)
                .map(|d| profile[(i + d) % len] + profile[(i + len - d) % len])
                .sum::<f64>()
                / k;
            profile[i] > beta * noise
        })
        .collect())
}
