//! Quadratic surrogate of `sum w_i |r_mki|^p` around the current grid.
//!
//! Every coefficient is stored with the common factor `r_bar^(p-2)` removed
//! (`a = r_bar^(p-2) a_hat`, `b = r_bar^(p-1) b_hat`, `c = r_bar^(p-2) c_hat`),
//! which leaves the descent direction unchanged up to a positive scale and
//! keeps large `p` finite. With `t = |r| / r_bar`:
//!
//! ```text
//! a_hat = sum_{s=0}^{p-2} (s+1) t^s
//! b_hat = p t^(p-1) - 2 a_hat t
//! c_hat = a_hat + b_hat / (2t) = p t^(p-2) / 2
//! ```
//!
//! The Hessian-like matrix `Q = sum w c (conj(r) A + r A^H)` is block diagonal
//! per sub-carrier with `M x M` Hermitian blocks
//! `Q_n[m,k] = v_mk[n] + conj(v_km[n])`, `v_mk = N * dft(w c r_mk)`.

use std::sync::Mutex;

use num_complex::Complex64;

use crate::eigen::{hermitian_upper_bound, MaxEigen};
use crate::spectrum::{mainlobe, peak_in, peak_sidelobe, CorrelationTensor, LagWeights, SymbolGrid, Transform};
use crate::{Error, Result};

/// Sidelobes at or below this fraction of the mainlobe count as zero.
pub const ZERO_SIDELOBE_REL: f64 = 1e-12;

/// Closed form is used up to this ratio; above it the numerator cancels
/// and the series takes over.
const CLOSED_FORM_MAX_T: f64 = 0.99;

/// `(a_hat, t^(p-2))` for ratio `t` in `[0, 1]`.
fn a_hat_and_power(p: u32, t: f64) -> (f64, f64) {
    let tp2 = t.powi(p as i32 - 2);
    if t <= CLOSED_FORM_MAX_T {
        let pf = p as f64;
        let tp1 = tp2 * t;
        let a = (1.0 - pf * tp1 + (pf - 1.0) * tp1 * t) / ((1.0 - t) * (1.0 - t));
        return (a, tp2);
    }
    let a = (0..=p - 2).rev().fold(0.0, |acc, s| acc * t + (s + 1) as f64);
    (a, tp2)
}

/// `(a_hat, c_hat)`, the two coefficients an MM step needs.
fn a_and_c(p: u32, t: f64) -> (f64, f64) {
    let (a, tp2) = a_hat_and_power(p, t);
    let c = if t > 0.0 { 0.5 * p as f64 * tp2 } else { a };
    (a, c)
}

/// `(a_hat, b_hat, c_hat)` for one ratio `t = x0 / x_bar`.
pub fn factored_coefficients(p: u32, t: f64) -> (f64, f64, f64) {
    let (a, tp2) = a_hat_and_power(p, t);
    let pf = p as f64;
    let b = pf * tp2 * t - 2.0 * a * t;
    let c = if t > 0.0 { 0.5 * pf * tp2 } else { a };
    (a, b, c)
}

/// Coefficients `(a, b)` of `a x^2 + b x + const >= x^p` on `[0, x_bar]`,
/// tight at `x0`.
pub fn scalar_pnorm_majorizer(p: u32, x0: f64, x_bar: f64) -> Result<(f64, f64)> {
    if p < 2 {
        return Err(Error::InvalidParameter(format!("p = {p} < 2")));
    }
    if !(x0 >= 0.0 && x_bar >= 0.0) || !x0.is_finite() || !x_bar.is_finite() {
        return Err(Error::InvalidParameter("x0 and x_bar must be finite and >= 0".into()));
    }
    if x0 > x_bar * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!("x0 = {x0} exceeds x_bar = {x_bar}")));
    }
    if x_bar == 0.0 {
        return Ok((0.0, 0.0));
    }
    let t = (x0 / x_bar).min(1.0);
    let (a, b, _) = factored_coefficients(p, t);
    let scale = x_bar.powi(p as i32 - 2);
    Ok((scale * a, scale * x_bar * b))
}

/// Per-lag factored coefficients; entries with zero weight hold zeros.
#[derive(Clone, Debug)]
pub struct MajorizerCoeffs {
    n: usize,
    m: usize,
    p: u32,
    r_bar: f64,
    a_hat: Vec<f64>,
    b_hat: Vec<f64>,
    c_hat: Vec<f64>,
}

impl MajorizerCoeffs {
    fn idx(&self, m: usize, k: usize, i: usize) -> usize {
        (m * self.m + k) * self.n + i
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn r_bar(&self) -> f64 {
        self.r_bar
    }

    pub fn a_hat(&self, m: usize, k: usize, i: usize) -> f64 {
        self.a_hat[self.idx(m, k, i)]
    }

    pub fn b_hat(&self, m: usize, k: usize, i: usize) -> f64 {
        self.b_hat[self.idx(m, k, i)]
    }

    pub fn c_hat(&self, m: usize, k: usize, i: usize) -> f64 {
        self.c_hat[self.idx(m, k, i)]
    }

    /// `a = r_bar^(p-2) a_hat`. Overflows for large `p`; meant for checks.
    pub fn a(&self, m: usize, k: usize, i: usize) -> f64 {
        self.r_bar.powi(self.p as i32 - 2) * self.a_hat(m, k, i)
    }

    pub fn b(&self, m: usize, k: usize, i: usize) -> f64 {
        self.r_bar.powi(self.p as i32 - 1) * self.b_hat(m, k, i)
    }

    pub fn c(&self, m: usize, k: usize, i: usize) -> f64 {
        self.r_bar.powi(self.p as i32 - 2) * self.c_hat(m, k, i)
    }
}

/// Fails with [`Error::ZeroSidelobe`] when the peak weighted sidelobe is zero
/// (relative to the mainlobe).
pub fn coefficients(corr: &CorrelationTensor, weights: &LagWeights, p: u32) -> Result<MajorizerCoeffs> {
    if p < 2 {
        return Err(Error::InvalidParameter(format!("p = {p} < 2")));
    }
    let (r_bar, _) = peak_sidelobe(corr, weights)?;
    coefficients_at(corr, weights, p, r_bar)
}

fn coefficients_at(corr: &CorrelationTensor, weights: &LagWeights, p: u32, r_bar: f64) -> Result<MajorizerCoeffs> {
    if r_bar <= ZERO_SIDELOBE_REL * mainlobe(corr).abs() {
        return Err(Error::ZeroSidelobe);
    }
    let (n, m) = (corr.n(), corr.m());
    let len = m * m * n;
    let mut a = vec![0.0; len];
    let mut b = vec![0.0; len];
    let mut c = vec![0.0; len];
    let lags: Vec<usize> = (0..n).filter(|&i| weights.get(i) != 0.0).collect();
    let values = corr.as_slice();
    for base in (0..len).step_by(n.max(1)) {
        for &i in &lags {
            let j = base + i;
            let t = (values[j].norm_sqr().sqrt() / r_bar).min(1.0);
            let (ah, bh, ch) = factored_coefficients(p, t);
            debug_assert!(bh <= 1e-9 * ah, "b_hat = {bh} positive");
            a[j] = ah;
            b[j] = bh;
            c[j] = ch;
        }
    }
    Ok(MajorizerCoeffs {
        n,
        m,
        p,
        r_bar,
        a_hat: a,
        b_hat: b,
        c_hat: c,
    })
}

/// `lambda_bar = N^3 max w a_hat`, a bound on the largest eigenvalue of
/// `sum w a vec(A) vec(A)^H` (scaled).
pub fn lambda_bar(coeffs: &MajorizerCoeffs, weights: &LagWeights) -> f64 {
    let n = coeffs.n;
    let peak = coeffs
        .a_hat
        .iter()
        .enumerate()
        .map(|(j, a)| a * weights.get(j % n))
        .fold(0.0, f64::max);
    (n as f64).powi(3) * peak
}

/// `v_mk[n]`, indexed `(m * M + k) * N + n`.
#[derive(Clone, Debug)]
pub struct VFields {
    n: usize,
    m: usize,
    data: Vec<Complex64>,
}

impl VFields {
    pub fn get(&self, m: usize, k: usize, n: usize) -> Complex64 {
        self.data[(m * self.m + k) * self.n + n]
    }

    /// Row-major Hermitian block of sub-carrier `n`.
    pub fn block(&self, n: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.m * self.m];
        self.fill_block(n, &mut out);
        out
    }

    pub fn fill_block(&self, n: usize, out: &mut [Complex64]) {
        fill_block(&self.data, self.n, self.m, n, out);
    }
}

fn v_fields_with(
    transform: &Transform,
    corr: &CorrelationTensor,
    coeffs: &MajorizerCoeffs,
    weights: &LagWeights,
) -> VFields {
    let (n, m) = (corr.n(), corr.m());
    let kappa = n as f64;
    let mut data = vec![Complex64::new(0.0, 0.0); m * m * n];
    for a in 0..m {
        for b in 0..m {
            let base = (a * m + b) * n;
            let out = &mut data[base..base + n];
            for (i, (o, r)) in out.iter_mut().zip(corr.pair(a, b)).enumerate() {
                *o = r * (weights.get(i) * coeffs.c_hat[base + i] * kappa);
            }
        }
    }
    if !data.is_empty() {
        transform.forward(&mut data);
    }
    VFields { n, m, data }
}

pub fn v_fields(corr: &CorrelationTensor, coeffs: &MajorizerCoeffs, weights: &LagWeights) -> VFields {
    v_fields_with(&Transform::new(corr.n()), corr, coeffs, weights)
}

/// Largest eigenvalue over all sub-carrier blocks of `Q`.
/// Blocks are visited in decreasing order of a cheap upper bound; a block
/// is solved exactly only when a definiteness test cannot rule out that it
/// beats the best value so far, and the scan stops once no remaining bound
/// can.
pub fn mu_bar(v: &VFields) -> Result<f64> {
    mu_bar_in(&v.data, v.n, v.m)
}

fn fill_block(data: &[Complex64], n: usize, m: usize, t: usize, out: &mut [Complex64]) {
    for a in 0..m {
        for b in 0..m {
            out[a * m + b] = data[(a * m + b) * n + t] + data[(b * m + a) * n + t].conj();
        }
    }
}

fn mu_bar_in(data: &[Complex64], n: usize, m: usize) -> Result<f64> {
    if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("Q blocks"));
    }
    let mut block = vec![Complex64::new(0.0, 0.0); m * m];
    let mut order: Vec<(f64, usize)> = (0..n)
        .map(|t| {
            fill_block(data, n, m, t, &mut block);
            (hermitian_upper_bound(&block, m), t)
        })
        .collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut solver = MaxEigen::new(m);
    let mut best = f64::NEG_INFINITY;
    for (bound, t) in order {
        if bound <= best {
            break;
        }
        fill_block(data, n, m, t, &mut block);
        if best.is_finite() && solver.all_below(&block, best) {
            continue;
        }
        best = best.max(solver.largest(&block));
    }
    Ok(best)
}

/// Everything one MM step needs at the current grid.
#[derive(Clone, Debug)]
pub struct Majorization {
    /// `Q x - 2 lambda_bar ||x||^2 x - mu_bar x` (scaled).
    pub y: SymbolGrid,
    pub eta: f64,
    pub argmax: (usize, usize, usize),
    pub lambda_bar: f64,
    pub mu_bar: f64,
}

#[derive(Debug, Default)]
struct Workspace {
    products: Vec<Complex64>,
    corr: Vec<Complex64>,
    v: Vec<Complex64>,
}

/// Reusable majorizer for one grid size, weight vector and exponent.
/// Scratch buffers are kept between calls.
#[derive(Debug)]
pub struct Majorizer {
    transform: Transform,
    weights: LagWeights,
    lags: Vec<usize>,
    p: u32,
    work: Mutex<Workspace>,
}

impl Clone for Majorizer {
    fn clone(&self) -> Self {
        Self {
            transform: self.transform.clone(),
            weights: self.weights.clone(),
            lags: self.lags.clone(),
            p: self.p,
            work: Mutex::default(),
        }
    }
}

impl Majorizer {
    pub fn new(n: usize, weights: LagWeights, p: u32) -> Result<Self> {
        if weights.len() != n {
            return Err(Error::Dimension(format!("{} weights for N = {n}", weights.len())));
        }
        if p < 2 {
            return Err(Error::InvalidParameter(format!("p = {p} < 2")));
        }
        let lags = (0..n).filter(|&i| weights.get(i) != 0.0).collect();
        Ok(Self {
            transform: Transform::new(n),
            weights,
            lags,
            p,
            work: Mutex::default(),
        })
    }

    pub fn weights(&self) -> &LagWeights {
        &self.weights
    }

    pub fn correlations(&self, x: &SymbolGrid) -> Result<CorrelationTensor> {
        self.transform.correlations(x)
    }

    /// Peak weighted sidelobe of `x`.
    pub fn eta(&self, x: &SymbolGrid) -> Result<f64> {
        Ok(peak_sidelobe(&self.correlations(x)?, &self.weights)?.0)
    }

    pub fn majorize(&self, x: &SymbolGrid) -> Result<Majorization> {
        let (n, m) = (x.n(), x.m());
        if n != self.transform.len() {
            return Err(Error::Dimension(format!(
                "grid has N = {n}, majorizer has N = {}",
                self.transform.len()
            )));
        }
        let mut guard = self.work.lock().unwrap_or_else(|e| e.into_inner());
        let Workspace { products, corr, v } = &mut *guard;
        self.transform.correlations_into(x, products, corr);
        let (eta, argmax) = peak_in(corr, n, m, &self.weights)?;
        let main = (0..m).map(|a| corr[(a * m + a) * n].re).sum::<f64>() / m as f64;
        if eta <= ZERO_SIDELOBE_REL * main.abs() {
            return Err(Error::ZeroSidelobe);
        }

        // v_mk = N DFT(w c_hat r_mk), with lambda_bar's peak of w a_hat on the way
        let kappa = n as f64;
        let mut peak_a = 0.0f64;
        v.clear();
        v.resize(m * m * n, Complex64::new(0.0, 0.0));
        for base in (0..m * m * n).step_by(n) {
            for &i in &self.lags {
                let r = corr[base + i];
                let w = self.weights.get(i);
                let t = (r.norm_sqr().sqrt() / eta).min(1.0);
                let (a, c) = a_and_c(self.p, t);
                peak_a = peak_a.max(w * a);
                v[base + i] = r * (w * c * kappa);
            }
        }
        self.transform.forward(v);
        let lam = kappa.powi(3) * peak_a;
        let mu = mu_bar_in(v, n, m)?;

        let shift = 2.0 * lam * x.energy() + mu;
        let mut y = SymbolGrid::zeros(n, m);
        let mut block = vec![Complex64::new(0.0, 0.0); m * m];
        for t in 0..n {
            fill_block(v, n, m, t, &mut block);
            for a in 0..m {
                let mut acc = -x.get(t, a) * shift;
                for b in 0..m {
                    acc += block[a * m + b] * x.get(t, b);
                }
                y.set(t, a, acc);
            }
        }
        Ok(Majorization {
            y,
            eta,
            argmax,
            lambda_bar: lam,
            mu_bar: mu,
        })
    }
}

pub fn majorize_direction(x: &SymbolGrid, weights: &LagWeights, p: u32) -> Result<Majorization> {
    Majorizer::new(x.n(), weights.clone(), p)?.majorize(x)
}
