//! PSK and square-QAM constellations, Gray labels and sub-carrier masks.
//!
//! PSK points sit on the unit circle at `π/Q + 2πk/Q`, so QPSK label `00`
//! maps to `e^{jπ/4}`. QAM points are unnormalized odd integers per axis;
//! the upper half of the label picks the in-phase level and the lower half
//! the quadrature level, each Gray coded from the most negative level up.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::spectrum::SymbolGrid;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Psk,
    Qam,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstellationSpec {
    pub family: Family,
    pub order: u32,
    /// Similarity factor, `0 < rho < 0.5`.
    pub rho: f64,
    /// PSK amplitude slack, `0 <= eps_a < 1`.
    pub eps_a: f64,
}

fn gray(k: u32) -> u32 {
    k ^ (k >> 1)
}

fn gray_inverse(mut g: u32) -> u32 {
    let mut k = g;
    while g > 0 {
        g >>= 1;
        k ^= g;
    }
    k
}

impl ConstellationSpec {
    pub fn new(family: Family, order: u32, rho: f64, eps_a: f64) -> Result<Self> {
        if order < 2 || !order.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "order {order} is not a power of two >= 2"
            )));
        }
        if family == Family::Qam && !order.trailing_zeros().is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!("QAM order {order} is not square")));
        }
        if !(rho > 0.0 && rho < 0.5) {
            return Err(Error::InvalidParameter(format!("rho = {rho} outside (0, 0.5)")));
        }
        if !(0.0..1.0).contains(&eps_a) {
            return Err(Error::InvalidParameter(format!("eps_a = {eps_a} outside [0, 1)")));
        }
        Ok(Self {
            family,
            order,
            rho,
            eps_a,
        })
    }

    pub fn qpsk(rho: f64, eps_a: f64) -> Result<Self> {
        Self::new(Family::Psk, 4, rho, eps_a)
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.order.trailing_zeros() as usize
    }

    /// PSK phase slack `2πρ/Q`.
    pub fn eps_p(&self) -> f64 {
        2.0 * PI * self.rho / self.order as f64
    }

    /// QAM disc radius `2ρ`.
    pub fn eps_r(&self) -> f64 {
        2.0 * self.rho
    }

    fn qam_side(&self) -> u32 {
        1 << (self.order.trailing_zeros() / 2)
    }

    /// Largest per-axis QAM level, `sqrt(Q) - 1`.
    pub fn qam_max_level(&self) -> f64 {
        (self.qam_side() - 1) as f64
    }

    pub fn with_rho(&self, rho: f64) -> Result<Self> {
        Self::new(self.family, self.order, rho, self.eps_a)
    }

    pub fn point(&self, label: u32) -> Complex64 {
        match self.family {
            Family::Psk => {
                let k = gray_inverse(label);
                let q = self.order as f64;
                Complex64::from_polar(1.0, PI / q + 2.0 * PI * k as f64 / q)
            }
            Family::Qam => {
                let half = self.bits_per_symbol() / 2;
                let side = self.qam_side();
                let level = |g: u32| 2.0 * gray_inverse(g) as f64 - (side - 1) as f64;
                let hi = label >> half;
                let lo = label & ((1 << half) - 1);
                Complex64::new(level(hi), level(lo))
            }
        }
    }

    /// All points indexed by label.
    pub fn points(&self) -> Vec<Complex64> {
        (0..self.order).map(|l| self.point(l)).collect()
    }

    pub fn mean_energy(&self) -> f64 {
        self.points().iter().map(|z| z.norm_sqr()).sum::<f64>() / self.order as f64
    }

    /// Minimum-distance hard decision.
    pub fn nearest_label(&self, z: Complex64) -> u32 {
        match self.family {
            Family::Psk => {
                let q = self.order as f64;
                let k = ((z.arg() - PI / q) * q / (2.0 * PI)).round();
                let k = (k.rem_euclid(q)) as u32 % self.order;
                gray(k)
            }
            Family::Qam => {
                let side = self.qam_side();
                let half = self.bits_per_symbol() / 2;
                let axis = |v: f64| {
                    let j = ((v + (side - 1) as f64) / 2.0).round();
                    gray(j.clamp(0.0, (side - 1) as f64) as u32)
                };
                (axis(z.re) << half) | axis(z.im)
            }
        }
    }
}

/// Flags per grid entry; `true` marks a data-carrying sub-carrier.
#[derive(Clone, Debug, PartialEq)]
pub struct SubcarrierMask {
    n: usize,
    m: usize,
    used: Vec<bool>,
}

/// `round(0.05 N)`.
pub fn default_unused_count(n: usize) -> usize {
    (0.05 * n as f64).round() as usize
}

impl SubcarrierMask {
    pub fn all_used(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            used: vec![true; n * m],
        }
    }

    pub fn from_stacked(n: usize, m: usize, used: Vec<bool>) -> Result<Self> {
        if used.len() != n * m {
            return Err(Error::Dimension(format!(
                "mask length {} != N*M = {}",
                used.len(),
                n * m
            )));
        }
        Ok(Self { n, m, used })
    }

    /// `n_unused` positions per antenna, drawn independently and uniformly.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize, n_unused: usize) -> Result<Self> {
        if n_unused >= n {
            return Err(Error::InvalidParameter(format!(
                "{n_unused} unused sub-carriers leaves none of {n} in use"
            )));
        }
        let mut used = vec![true; n * m];
        for a in 0..m {
            for idx in sample(rng, n, n_unused) {
                used[a * n + idx] = false;
            }
        }
        Ok(Self { n, m, used })
    }

    /// Guard bands: `ceil(n_unused/2)` at the low edge and the rest at the
    /// high edge, same on every antenna.
    pub fn edge_guard(n: usize, m: usize, n_unused: usize) -> Result<Self> {
        if n_unused >= n {
            return Err(Error::InvalidParameter(format!(
                "{n_unused} unused sub-carriers leaves none of {n} in use"
            )));
        }
        let low = n_unused.div_ceil(2);
        let high = n_unused - low;
        let col: Vec<bool> = (0..n).map(|i| i >= low && i < n - high).collect();
        Ok(Self {
            n,
            m,
            used: col.repeat(m),
        })
    }

    /// Antenna `a` uses sub-carriers `a, a + M, a + 2M, ...`.
    pub fn interleaved(n: usize, m: usize) -> Self {
        let used = (0..m).flat_map(|a| (0..n).map(move |i| i % m == a)).collect();
        Self { n, m, used }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn is_used(&self, n: usize, m: usize) -> bool {
        self.used[m * self.n + n]
    }

    pub fn stacked(&self) -> &[bool] {
        &self.used
    }

    pub fn used_count(&self) -> usize {
        self.used.iter().filter(|u| **u).count()
    }
}

/// Bits as 0/1 bytes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitStream(pub Vec<u8>);

impl BitStream {
    pub fn random<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Self {
        Self((0..len).map(|_| rng.random_range(0..2u8)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bit_errors(&self, other: &BitStream) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }
}

/// Map bits onto the used entries in stacked order; unused entries are zero.
pub fn modulate(bits: &BitStream, spec: &ConstellationSpec, mask: &SubcarrierMask) -> Result<SymbolGrid> {
    let bps = spec.bits_per_symbol();
    let need = bps * mask.used_count();
    if bits.len() != need {
        return Err(Error::Dimension(format!("{} bits supplied, {need} needed", bits.len())));
    }
    let mut data = vec![Complex64::new(0.0, 0.0); mask.n * mask.m];
    let mut chunks = bits.0.chunks(bps);
    for (slot, used) in data.iter_mut().zip(&mask.used) {
        if *used {
            let label = chunks
                .next()
                .expect("length checked")
                .iter()
                .fold(0u32, |acc, b| (acc << 1) | *b as u32);
            *slot = spec.point(label);
        }
    }
    SymbolGrid::from_stacked(mask.n, mask.m, data)
}

/// Hard decisions on used entries against the ideal constellation.
pub fn demodulate(grid: &SymbolGrid, spec: &ConstellationSpec, mask: &SubcarrierMask) -> Result<BitStream> {
    if grid.n() != mask.n || grid.m() != mask.m {
        return Err(Error::Dimension("grid and mask shapes differ".into()));
    }
    let bps = spec.bits_per_symbol();
    let mut out = Vec::with_capacity(bps * mask.used_count());
    for (z, used) in grid.stacked().iter().zip(&mask.used) {
        if *used {
            let label = spec.nearest_label(*z);
            out.extend((0..bps).rev().map(|b| ((label >> b) & 1) as u8));
        }
    }
    Ok(BitStream(out))
}

/// Fully orthogonal baseline: antenna `a` carries random symbols on
/// sub-carriers `a + iM` only.
pub fn orthogonal_interleaved_grid<R: Rng + ?Sized>(
    rng: &mut R,
    spec: &ConstellationSpec,
    n: usize,
    m: usize,
) -> Result<SymbolGrid> {
    let mask = SubcarrierMask::interleaved(n, m);
    let bits = BitStream::random(rng, spec.bits_per_symbol() * mask.used_count());
    modulate(&bits, spec, &mask)
}

/// Fractional sum-rate loss of the interleaved grid relative to a grid with
/// `n_unused` idle sub-carriers per antenna: `1 - (N/M) / (N - N_un)`.
pub fn sum_rate_loss(n: usize, m: usize, n_unused: usize) -> f64 {
    1.0 - (n as f64 / m as f64) / (n - n_unused) as f64
}
