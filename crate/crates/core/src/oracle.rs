//! Dense reference computations for small grids.
//!
//! Everything here is built from explicit matrices: the DFT matrix `F`, the
//! cyclic shift `J_i`, `A_i = F J_i F^H = N diag(e^{j2πni/N})` and the
//! stacked `MN x MN` matrices `A_mki` with `r_mki = x^H A_mki x`. Eigenvalues
//! come from nalgebra, not from [`crate::jacobi`]. Sizes are capped so the
//! `(MN)^2 x (MN)^2` matrix stays small.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::majorizer::{coefficients, lambda_bar, v_fields, Majorizer, MajorizerCoeffs};
use crate::spectrum::{cyclic_correlations, CorrelationTensor, LagWeights, SymbolGrid};
use crate::{Error, Result};

type CMat = DMatrix<Complex64>;

const MAX_SUM_P_DIM: usize = 16;
const MAX_Q_DIM: usize = 48;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

pub fn dft_matrix(n: usize) -> CMat {
    CMat::from_fn(n, n, |r, c| {
        Complex64::from_polar(1.0, -2.0 * PI * ((r * c) % n) as f64 / n as f64)
    })
}

/// `(J_i s)[t] = s[(t + i) mod N]`.
pub fn shift_matrix(n: usize, i: usize) -> CMat {
    CMat::from_fn(n, n, |r, c| {
        if c == (r + i) % n {
            Complex64::new(1.0, 0.0)
        } else {
            zero()
        }
    })
}

/// `N x N` lag matrix `A_i`, built as `F J_i F^H` and checked against its
/// diagonal closed form.
pub fn lag_matrix(n: usize, i: usize) -> Result<CMat> {
    let f = dft_matrix(n);
    let prod = &f * shift_matrix(n, i) * f.adjoint();
    let diag = CMat::from_fn(n, n, |r, c| {
        if r == c {
            Complex64::from_polar(n as f64, 2.0 * PI * ((r * i) % n) as f64 / n as f64)
        } else {
            zero()
        }
    });
    let err = (&prod - &diag).norm() / diag.norm();
    if err > 1e-10 {
        return Err(Error::InvalidParameter(format!(
            "product and diagonal forms of A_{i} differ by {err:e}"
        )));
    }
    Ok(prod)
}

/// Stacked `A_mki`: block row `k`, block column `m` holds `A_i`.
pub fn dense_a(m: usize, k: usize, i: usize, n: usize, big_m: usize) -> Result<CMat> {
    if m >= big_m || k >= big_m || i >= n {
        return Err(Error::Dimension(format!("index ({m}, {k}, {i}) out of range")));
    }
    let ai = lag_matrix(n, i)?;
    let mut out = CMat::zeros(big_m * n, big_m * n);
    out.view_mut((k * n, m * n), (n, n)).copy_from(&ai);
    Ok(out)
}

fn stacked_vec(x: &SymbolGrid) -> nalgebra::DVector<Complex64> {
    nalgebra::DVector::from_column_slice(x.stacked())
}

/// `r_mki = x^H A_mki x` straight from the dense matrices.
pub fn dense_correlations(x: &SymbolGrid) -> Result<Vec<Complex64>> {
    let (n, m) = (x.n(), x.m());
    let v = stacked_vec(x);
    let mut out = Vec::with_capacity(m * m * n);
    for a in 0..m {
        for b in 0..m {
            for i in 0..n {
                let am = dense_a(a, b, i, n, m)?;
                out.push((v.adjoint() * &am * &v)[(0, 0)]);
            }
        }
    }
    Ok(out)
}

fn hermitian_max_eig(h: &CMat) -> f64 {
    let sym = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    sym.symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
}

fn hermitian_deviation(h: &CMat) -> f64 {
    let scale = h.norm().max(f64::MIN_POSITIVE);
    (h - h.adjoint()).norm() / scale
}

/// `sum w a_hat vec(A) vec(A)^H` and its largest eigenvalue.
pub fn dense_sum_p(coeffs: &MajorizerCoeffs, weights: &LagWeights, n: usize, big_m: usize) -> Result<(CMat, f64)> {
    let dim = big_m * n;
    if dim > MAX_SUM_P_DIM {
        return Err(Error::TooLarge(format!("MN = {dim} > {MAX_SUM_P_DIM} for sum-P")));
    }
    let mut p = CMat::zeros(dim * dim, dim * dim);
    for a in 0..big_m {
        for b in 0..big_m {
            for i in 0..n {
                let w = weights.get(i) * coeffs.a_hat(a, b, i);
                if w == 0.0 {
                    continue;
                }
                let am = dense_a(a, b, i, n, big_m)?;
                let v = nalgebra::DVector::from_column_slice(am.as_slice());
                p += (&v * v.adjoint()) * Complex64::new(w, 0.0);
            }
        }
    }
    let lam = hermitian_max_eig(&p);
    Ok((p, lam))
}

/// `Q = sum w c_hat (conj(r) A + r A^H)` as a dense `MN x MN` matrix.
/// Fails if the result is not Hermitian or couples different sub-carriers.
pub fn dense_q(corr: &CorrelationTensor, coeffs: &MajorizerCoeffs, weights: &LagWeights) -> Result<CMat> {
    let (n, m) = (corr.n(), corr.m());
    let dim = n * m;
    if dim > MAX_Q_DIM {
        return Err(Error::TooLarge(format!("MN = {dim} > {MAX_Q_DIM} for dense Q")));
    }
    let mut q = CMat::zeros(dim, dim);
    for a in 0..m {
        for b in 0..m {
            for i in 0..n {
                let w = weights.get(i) * coeffs.c_hat(a, b, i);
                if w == 0.0 {
                    continue;
                }
                let am = dense_a(a, b, i, n, m)?;
                let r = corr.get(a, b, i);
                q += (&am * r.conj() + am.adjoint() * r) * Complex64::new(w, 0.0);
            }
        }
    }
    let dev = hermitian_deviation(&q);
    if dev > 1e-10 {
        return Err(Error::NotSymmetric(dev));
    }
    let scale = q.norm().max(f64::MIN_POSITIVE);
    for r in 0..dim {
        for c in 0..dim {
            if r % n != c % n && q[(r, c)].norm() > 1e-10 * scale {
                return Err(Error::InvalidParameter(format!(
                    "Q couples sub-carriers {} and {}",
                    r % n,
                    c % n
                )));
            }
        }
    }
    Ok(q)
}

/// Worst relative differences between the fast path and the dense oracle.
#[derive(Clone, Debug, Default)]
pub struct EquivalenceReport {
    pub correlations: f64,
    pub lambda_bar: f64,
    pub q_blocks: f64,
    pub mu_bar: f64,
    pub direction: f64,
}

impl EquivalenceReport {
    pub fn worst(&self) -> f64 {
        [
            self.correlations,
            self.lambda_bar,
            self.q_blocks,
            self.mu_bar,
            self.direction,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Compare every fast-path quantity of one majorization against the dense
/// construction.
pub fn fast_vs_dense(x: &SymbolGrid, weights: &LagWeights, p: u32) -> Result<EquivalenceReport> {
    let (n, m) = (x.n(), x.m());
    if n * m > MAX_SUM_P_DIM {
        return Err(Error::TooLarge(format!("MN = {} > {MAX_SUM_P_DIM}", n * m)));
    }
    let corr = cyclic_correlations(x);
    let dense_r = dense_correlations(x)?;
    let rscale = dense_r.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let corr_err = corr
        .as_slice()
        .iter()
        .zip(&dense_r)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
        / rscale;

    let coeffs = coefficients(&corr, weights, p)?;
    let lam_fast = lambda_bar(&coeffs, weights);
    let (_, lam_dense) = dense_sum_p(&coeffs, weights, n, m)?;

    let q = dense_q(&corr, &coeffs, weights)?;
    let v = v_fields(&corr, &coeffs, weights);
    let qscale = q.norm().max(f64::MIN_POSITIVE);
    let mut q_err = 0.0f64;
    for t in 0..n {
        let blk = v.block(t);
        for a in 0..m {
            for b in 0..m {
                q_err = q_err.max((blk[a * m + b] - q[(a * n + t, b * n + t)]).norm() / qscale);
            }
        }
    }
    let mu_dense = hermitian_max_eig(&q);

    let maj = Majorizer::new(n, weights.clone(), p)?.majorize(x)?;
    let xv = stacked_vec(x);
    let energy = x.energy();
    let y_dense = &q * &xv - &xv * Complex64::new(2.0 * lam_dense * energy + mu_dense, 0.0);
    let yscale = y_dense.norm().max(f64::MIN_POSITIVE);
    let y_err = maj
        .y
        .stacked()
        .iter()
        .zip(y_dense.iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
        / yscale;

    Ok(EquivalenceReport {
        correlations: corr_err,
        lambda_bar: rel(lam_fast, lam_dense),
        q_blocks: q_err,
        mu_bar: rel(maj.mu_bar, mu_dense),
        direction: y_err,
    })
}

/// Outcome of the surrogate chain `f <= S1 <= S2 <= S3` over perturbations.
#[derive(Clone, Debug)]
pub struct ChainReport {
    pub trials: usize,
    pub passed: usize,
    /// Largest `(lower - upper) / |f(x_l)|` seen; `<= tol` means every link held.
    pub worst_violation: f64,
    /// Largest relative gap between the levels at `x_l` itself.
    pub touch_error: f64,
}

struct Levels {
    f: f64,
    s1: f64,
    s2: f64,
    s3: f64,
}

/// Check the three-level majorization at `x_l` over `trials` random nearby
/// points. A point qualifies when every weighted `|r|` stays at or below
/// `r_bar`, the domain on which the scalar bound holds. All levels carry the
/// factor `r_bar^(2-p)`.
pub fn majorization_chain_check<R: Rng + ?Sized>(
    rng: &mut R,
    x_l: &SymbolGrid,
    weights: &LagWeights,
    p: u32,
    trials: usize,
    tol: f64,
) -> Result<ChainReport> {
    let (n, m) = (x_l.n(), x_l.m());
    if n * m > MAX_Q_DIM {
        return Err(Error::TooLarge(format!("MN = {} > {MAX_Q_DIM}", n * m)));
    }
    let corr_l = cyclic_correlations(x_l);
    let coeffs = coefficients(&corr_l, weights, p)?;
    let r_bar = coeffs.r_bar();
    let (_, lam) = if n * m <= MAX_SUM_P_DIM {
        dense_sum_p(&coeffs, weights, n, m)?
    } else {
        (CMat::zeros(0, 0), lambda_bar(&coeffs, weights))
    };
    let q = dense_q(&corr_l, &coeffs, weights)?;
    let mu = hermitian_max_eig(&q);
    let xl = stacked_vec(x_l);
    let el = x_l.energy();
    let y = &q * &xl - &xl * Complex64::new(2.0 * lam * el + mu, 0.0);

    let pf = p as i32;
    let mut k_const = 0.0;
    let mut sum_a_rl2 = 0.0;
    for a in 0..m {
        for b in 0..m {
            for i in 0..n {
                let w = weights.get(i);
                if w == 0.0 {
                    continue;
                }
                let t = corr_l.get(a, b, i).norm();
                let (ah, bh) = (coeffs.a_hat(a, b, i), coeffs.b_hat(a, b, i));
                let scaled_f = r_bar * r_bar * (t / r_bar).powi(pf);
                k_const += w * (scaled_f - ah * t * t - r_bar * bh * t);
                sum_a_rl2 += w * ah * t * t;
            }
        }
    }
    let k2 = lam * el * el - sum_a_rl2 + k_const;
    let qxl = (xl.adjoint() * &q * &xl)[(0, 0)].re;
    let k3 = mu * el - qxl + 2.0 * lam * el * el + k2;

    let levels = |x: &SymbolGrid| -> Levels {
        let corr = cyclic_correlations(x);
        let xv = stacked_vec(x);
        let e = x.energy();
        let (mut f, mut s1) = (0.0, 0.0);
        for a in 0..m {
            for b in 0..m {
                for i in 0..n {
                    let w = weights.get(i);
                    if w == 0.0 {
                        continue;
                    }
                    let rx = corr.get(a, b, i).norm();
                    let t = corr_l.get(a, b, i).norm();
                    let (ah, bh) = (coeffs.a_hat(a, b, i), coeffs.b_hat(a, b, i));
                    f += w * r_bar * r_bar * (rx / r_bar).powi(pf);
                    let c = r_bar * r_bar * (t / r_bar).powi(pf) - ah * t * t - r_bar * bh * t;
                    s1 += w * (ah * rx * rx + r_bar * bh * rx + c);
                }
            }
        }
        let xl_x = (xl.adjoint() * &xv)[(0, 0)];
        let quad = (xv.adjoint() * &q * &xv)[(0, 0)].re - 2.0 * lam * xl_x.norm_sqr();
        let s2 = lam * e * e + quad + k2;
        let s3 = lam * e * e + mu * e + 2.0 * (xv.adjoint() * &y)[(0, 0)].re + k3;
        Levels { f, s1, s2, s3 }
    };

    let at = levels(x_l);
    let scale = at.f.abs().max(f64::MIN_POSITIVE);
    let touch_error = [(at.s1 - at.f), (at.s2 - at.f), (at.s3 - at.f)]
        .into_iter()
        .map(|d| d.abs() / scale)
        .fold(0.0, f64::max);

    let mut passed = 0;
    let mut done = 0;
    let mut worst = f64::NEG_INFINITY;
    let mut attempts = 0;
    let unit = (el / (n * m) as f64).sqrt();
    while done < trials {
        attempts += 1;
        if attempts > 200 * trials.max(1) {
            return Err(Error::InvalidParameter(
                "could not draw perturbations inside the majorizer domain".into(),
            ));
        }
        let delta = unit * 10f64.powf(rng.random_range(-4.0..-1.0));
        let data: Vec<Complex64> = x_l
            .stacked()
            .iter()
            .map(|z| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                z + Complex64::new(re, im) * delta
            })
            .collect();
        let x = SymbolGrid::from_stacked(n, m, data)?;
        let corr = cyclic_correlations(&x);
        let peak = (0..m * m * n)
            .filter(|j| weights.get(j % n) > 0.0)
            .map(|j| corr.as_slice()[j].norm())
            .fold(0.0, f64::max);
        if peak > r_bar {
            continue;
        }
        done += 1;
        let lv = levels(&x);
        let v = [lv.f - lv.s1, lv.s1 - lv.s2, lv.s2 - lv.s3]
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max)
            / scale;
        worst = worst.max(v);
        if v <= tol {
            passed += 1;
        }
    }
    Ok(ChainReport {
        trials,
        passed,
        worst_violation: worst,
        touch_error,
    })
}

/// One named check of [`verification_suite`].
#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult { name, passed, detail }
}

fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMat {
    let g = CMat::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    (&g + g.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Small-size checks of the fast paths against the dense references.
pub fn verification_suite(seed: u64) -> Result<Vec<CheckResult>> {
    use crate::constellation::{orthogonal_interleaved_grid, sum_rate_loss, ConstellationSpec, Family};
    use crate::eigen::hermitian_eigenvalues;
    use crate::projector::{is_feasible, psk_project_entry, qam_project_entry};
    use crate::sensing::{cfar_threshold_factor, CfarConfig};
    use crate::spectrum::dft;
    use rand::SeedableRng;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let cgrid = |rng: &mut rand_chacha::ChaCha8Rng, n: usize, m: usize| {
        let data = (0..n * m)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        SymbolGrid::from_stacked(n, m, data)
    };

    let mut worst = 0.0f64;
    for n in [5, 8, 12] {
        let v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), 0.3))
            .collect();
        let dense = dft_matrix(n) * nalgebra::DVector::from_column_slice(&v);
        let fast = dft(&v);
        worst = worst.max(
            fast.iter()
                .zip(dense.iter())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max),
        );
    }
    out.push(check("dft_vs_matrix", worst < 1e-12, format!("max error {worst:.2e}")));

    let mut worst = 0.0f64;
    for (n, m) in [(4, 1), (4, 2), (8, 1), (8, 2)] {
        for p in [2, 4] {
            let w = LagWeights::cyclic_prefix(n, n / 2 + 1)?;
            worst = worst.max(fast_vs_dense(&cgrid(&mut rng, n, m)?, &w, p)?.worst());
        }
    }
    out.push(check(
        "majorizer_fast_vs_dense",
        worst <= 1e-8,
        format!("worst relative error {worst:.2e}"),
    ));

    let w = LagWeights::cyclic_prefix(8, 5)?;
    let x_l = cgrid(&mut rng, 8, 2)?;
    let rep = majorization_chain_check(&mut rng, &x_l, &w, 4, 100, 1e-8)?;
    out.push(check(
        "majorization_chain",
        rep.passed == rep.trials && rep.touch_error < 1e-9,
        format!(
            "{}/{} points, worst violation {:.2e}",
            rep.passed, rep.trials, rep.worst_violation
        ),
    ));

    let mut worst = 0.0f64;
    for dim in [1, 2, 4, 8] {
        for _ in 0..10 {
            let h = random_hermitian(&mut rng, dim);
            let mut ours = hermitian_eigenvalues(&h.transpose().iter().cloned().collect::<Vec<_>>(), dim)?;
            let mut theirs: Vec<f64> = h.symmetric_eigenvalues().iter().cloned().collect();
            ours.sort_by(f64::total_cmp);
            theirs.sort_by(f64::total_cmp);
            let scale = h.norm();
            worst = worst.max(
                ours.iter()
                    .zip(&theirs)
                    .map(|(a, b)| (a - b).abs() / scale)
                    .fold(0.0, f64::max),
            );
        }
    }
    out.push(check(
        "jacobi_vs_reference_eigensolver",
        worst < 1e-10,
        format!("worst relative error {worst:.2e}"),
    ));

    let psk = ConstellationSpec::qpsk(0.15, 0.2)?;
    let qam = ConstellationSpec::new(Family::Qam, 16, 0.15, 0.2)?;
    let mut bad = 0;
    let mut qam_err = 0.0f64;
    let trials = 10_000;
    for t in 0..trials {
        let z = Complex64::new(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
        let xr = psk.point(t as u32 % 4);
        let o = psk_project_entry(z, xr, psk.eps_a, psk.eps_p())?;
        if !is_feasible(o, xr, true, &psk, 1e-9) {
            bad += 1;
        }
        let xq = qam.point(t as u32 % 16);
        let oq = qam_project_entry(z, xq, qam.eps_r());
        if !is_feasible(oq, xq, true, &qam, 1e-9) {
            bad += 1;
        }
        // the nearest disc point lies on the segment from x_r toward z
        let d = (z - xq).norm();
        let want = if d <= qam.eps_r() {
            z
        } else {
            xq + (z - xq) * (qam.eps_r() / d)
        };
        qam_err = qam_err.max((oq - want).norm());
    }
    out.push(check(
        "projector_feasibility",
        bad == 0 && qam_err < 1e-12,
        format!("{bad} infeasible of {}, QAM max deviation {qam_err:.2e}", 2 * trials),
    ));

    let beta = cfar_threshold_factor(&CfarConfig::default())?;
    out.push(check(
        "cfar_threshold_factor",
        (beta - 13.03).abs() <= 0.01,
        format!("beta = {beta:.4}"),
    ));

    let loss = sum_rate_loss(128, 4, 6);
    let g = orthogonal_interleaved_grid(&mut rng, &psk, 128, 4)?;
    let corr = cyclic_correlations(&g);
    let mut cross = 0.0f64;
    for a in 0..4 {
        for b in 0..4 {
            if a != b {
                cross = cross.max(corr.pair(a, b).iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
    }
    out.push(check(
        "orthogonal_baseline",
        (loss - 0.738).abs() < 5e-4 && cross < 1e-9 * corr.get(0, 0, 0).re,
        format!("rate loss {:.2}%, max cross-correlation {cross:.2e}", 100.0 * loss),
    ));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lag_matrix_zero_is_n_identity() {
        let a = lag_matrix(4, 0).unwrap();
        assert!((a - CMat::identity(4, 4) * Complex64::new(4.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn vec_a_orthogonal_with_norm_n_cubed() {
        let (n, m) = (4, 2);
        let mats: Vec<CMat> = (0..m * m * n)
            .map(|j| dense_a(j / (m * n), (j / n) % m, j % n, n, m).unwrap())
            .collect();
        for (x, a) in mats.iter().enumerate() {
            for (y, b) in mats.iter().enumerate() {
                let ip: Complex64 = a.iter().zip(b.iter()).map(|(u, v)| u.conj() * v).sum();
                let want = if x == y { (n * n * n) as f64 } else { 0.0 };
                assert!((ip - Complex64::new(want, 0.0)).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn size_guards() {
        let w = LagWeights::cyclic_prefix(16, 4).unwrap();
        let x = SymbolGrid::from_stacked(16, 4, vec![Complex64::new(1.0, 0.5); 64]).unwrap();
        assert!(matches!(fast_vs_dense(&x, &w, 2), Err(Error::TooLarge(_))));
    }
}
