//! Flat-fading MIMO link with zero-forcing equalization.
//!
//! Per sub-carrier `n` the receiver sees `r[n] = H x[n] + w[n]` with
//! `H` a `K x M` matrix of i.i.d. `CN(0, 1)` gains shared by all
//! sub-carriers, and `w ~ CN(0, σ² I)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::spectrum::SymbolGrid;
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct ChannelRealization {
    /// `K x M`.
    pub h: DMatrix<Complex64>,
    pub noise_power: f64,
}

fn cn<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

impl ChannelRealization {
    /// Draws until the matrix has full column rank (`K >= M` required).
    pub fn draw<R: Rng + ?Sized>(rng: &mut R, k: usize, m: usize, noise_power: f64) -> Result<Self> {
        if k < m {
            return Err(Error::InvalidParameter(format!(
                "K = {k} receive antennas cannot separate M = {m} streams"
            )));
        }
        if noise_power.is_nan() || noise_power < 0.0 {
            return Err(Error::InvalidParameter("noise power must be >= 0".into()));
        }
        for _ in 0..100 {
            let h = DMatrix::from_fn(k, m, |_, _| cn(rng));
            let chan = Self { h, noise_power };
            if chan.is_full_rank() {
                return Ok(chan);
            }
        }
        Err(Error::RankDeficient)
    }

    pub fn is_full_rank(&self) -> bool {
        let sv = self.h.clone().singular_values();
        let max = sv.iter().cloned().fold(0.0, f64::max);
        let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        sv.len() == self.h.ncols() && min > 1e-10 * max.max(f64::MIN_POSITIVE)
    }
}

/// `N x K` received grid (one column per receive antenna).
pub fn channel_apply<R: Rng + ?Sized>(grid: &SymbolGrid, chan: &ChannelRealization, rng: &mut R) -> Result<SymbolGrid> {
    let (k, m) = chan.h.shape();
    if grid.m() != m {
        return Err(Error::Dimension(format!("grid has {} antennas, channel {m}", grid.m())));
    }
    let n = grid.n();
    let s = chan.noise_power.sqrt();
    let mut out = SymbolGrid::zeros(n, k);
    for r in 0..k {
        for t in 0..n {
            let mut acc: Complex64 = (0..m).map(|a| chan.h[(r, a)] * grid.get(t, a)).sum();
            if s > 0.0 {
                acc += cn(rng) * s;
            }
            out.set(t, r, acc);
        }
    }
    Ok(out)
}

/// `x_hat[n] = (H^H H)^-1 H^H r[n]`.
pub fn zf_equalize(received: &SymbolGrid, chan: &ChannelRealization) -> Result<SymbolGrid> {
    let (k, m) = chan.h.shape();
    if received.m() != k {
        return Err(Error::Dimension(format!(
            "{} receive columns, channel has K = {k}",
            received.m()
        )));
    }
    let hh = chan.h.adjoint();
    let gram = &hh * &chan.h;
    let inv = gram.try_inverse().ok_or(Error::RankDeficient)?;
    let pinv = inv * hh;
    let n = received.n();
    let mut out = SymbolGrid::zeros(n, m);
    for t in 0..n {
        for a in 0..m {
            let v: Complex64 = (0..k).map(|r| pinv[(a, r)] * received.get(t, r)).sum();
            out.set(t, a, v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn noiseless_zf_recovers_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = SymbolGrid::from_stacked(
            8,
            3,
            (0..24).map(|i| Complex64::new(i as f64, -(i as f64) * 0.5)).collect(),
        )
        .unwrap();
        let chan = ChannelRealization::draw(&mut rng, 4, 3, 0.0).unwrap();
        let r = channel_apply(&g, &chan, &mut rng).unwrap();
        let x = zf_equalize(&r, &chan).unwrap();
        for (a, b) in x.stacked().iter().zip(g.stacked()) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn rank_deficient_channel_rejected() {
        let chan = ChannelRealization {
            h: DMatrix::from_element(2, 2, Complex64::new(1.0, 0.0)),
            noise_power: 0.0,
        };
        assert!(!chan.is_full_rank());
        let r = SymbolGrid::zeros(4, 2);
        assert!(zf_equalize(&r, &chan).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(ChannelRealization::draw(&mut rng, 2, 3, 1.0).is_err());
    }
}
