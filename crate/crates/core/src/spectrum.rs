//! Symbol grids, length-N transforms and cyclic correlations.
//!
//! Conventions: the forward DFT is unnormalized with kernel `e^{-j2πnm/N}`,
//! the inverse carries the `1/N`. For columns `x_m` and `x_k` of the grid the
//! lag-`i` correlation is
//!
//! ```text
//! r_mki = N * sum_n x_m[n] conj(x_k[n]) e^{+j2πni/N} = N^2 * idft(x_m ⊙ conj x_k)[i]
//! ```
//!
//! which is the cyclic correlation of the time-domain OFDM symbols up to
//! scale. `r_kmi = conj(r_mk,(N-i) mod N)`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::{Error, Result};

/// `N x M` complex matrix stored column-major (`data[m * N + n]`).
///
/// Stacking the columns gives the `MN` vector the optimizer works on.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolGrid {
    n: usize,
    m: usize,
    data: Vec<Complex64>,
}

impl SymbolGrid {
    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            data: vec![Complex64::new(0.0, 0.0); n * m],
        }
    }

    pub fn from_stacked(n: usize, m: usize, data: Vec<Complex64>) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::Dimension("grid needs N >= 1 and M >= 1".into()));
        }
        if data.len() != n * m {
            return Err(Error::Dimension(format!(
                "stacked length {} != N*M = {}",
                data.len(),
                n * m
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("symbol grid"));
        }
        Ok(Self { n, m, data })
    }

    pub fn from_columns(columns: &[Vec<Complex64>]) -> Result<Self> {
        let n = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::Dimension("columns differ in length".into()));
        }
        Self::from_stacked(n, columns.len(), columns.concat())
    }

    /// Number of sub-carriers.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of antennas.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, n: usize, m: usize) -> Complex64 {
        self.data[m * self.n + n]
    }

    pub fn set(&mut self, n: usize, m: usize, z: Complex64) {
        self.data[m * self.n + n] = z;
    }

    pub fn column(&self, m: usize) -> &[Complex64] {
        &self.data[m * self.n..(m + 1) * self.n]
    }

    pub fn column_mut(&mut self, m: usize) -> &mut [Complex64] {
        &mut self.data[m * self.n..(m + 1) * self.n]
    }

    pub fn stacked(&self) -> &[Complex64] {
        &self.data
    }

    pub fn stacked_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_stacked(self) -> Vec<Complex64> {
        self.data
    }

    /// Squared Frobenius norm.
    pub fn energy(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn same_shape(&self, other: &SymbolGrid) -> bool {
        self.n == other.n && self.m == other.m
    }
}

/// Binary lag weights: `w_i = 1` for `1 <= i <= N_CP - 1`, zero otherwise.
#[derive(Clone, Debug, PartialEq)]
pub struct LagWeights {
    w: Vec<f64>,
}

impl LagWeights {
    pub fn cyclic_prefix(n: usize, n_cp: usize) -> Result<Self> {
        if n_cp > n {
            return Err(Error::InvalidParameter(format!("N_CP = {n_cp} exceeds N = {n}")));
        }
        let w = (0..n).map(|i| if i >= 1 && i < n_cp { 1.0 } else { 0.0 }).collect();
        Ok(Self { w })
    }

    /// Arbitrary non-negative weights, one per lag.
    pub fn from_vec(w: Vec<f64>) -> Result<Self> {
        if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter(
                "lag weights must be finite and non-negative".into(),
            ));
        }
        Ok(Self { w })
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.iter().all(|v| *v == 0.0)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    pub fn get(&self, i: usize) -> f64 {
        self.w[i]
    }
}

/// All `r_mki`, indexed `(m * M + k) * N + i`.
#[derive(Clone, Debug)]
pub struct CorrelationTensor {
    n: usize,
    m: usize,
    values: Vec<Complex64>,
}

impl CorrelationTensor {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, m: usize, k: usize, i: usize) -> Complex64 {
        self.values[(m * self.m + k) * self.n + i]
    }

    /// The `N` lags of the pair `(m, k)`.
    pub fn pair(&self, m: usize, k: usize) -> &[Complex64] {
        let start = (m * self.m + k) * self.n;
        &self.values[start..start + self.n]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.values
    }
}

/// Cached forward/inverse plans for one transform length.
#[derive(Clone)]
pub struct Transform {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Transform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Transform").field("n", &self.n).finish()
    }
}

impl Transform {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In-place unnormalized forward DFT of each consecutive length-`N`
    /// chunk of `buf`.
    pub fn forward(&self, buf: &mut [Complex64]) {
        self.fwd.process(buf);
    }

    /// In-place unnormalized inverse (no `1/N`), chunked like [`Self::forward`].
    pub fn backward(&self, buf: &mut [Complex64]) {
        self.inv.process(buf);
    }

    /// Correlations of every antenna pair. Only `M(M+1)/2` transforms are
    /// run; the rest follow from conjugate-lag symmetry.
    pub fn correlations(&self, grid: &SymbolGrid) -> Result<CorrelationTensor> {
        if grid.n() != self.n {
            return Err(Error::Dimension(format!(
                "grid has N = {}, transform has N = {}",
                grid.n(),
                self.n
            )));
        }
        let (n, m) = (grid.n(), grid.m());
        let mut buf = Vec::new();
        let mut values = Vec::new();
        self.correlations_into(grid, &mut buf, &mut values);
        Ok(CorrelationTensor { n, m, values })
    }

    /// [`Self::correlations`] into caller-owned buffers (`values` ends up
    /// `M^2 N` long, indexed like [`CorrelationTensor`]). The grid length
    /// must match the transform.
    pub(crate) fn correlations_into(&self, grid: &SymbolGrid, buf: &mut Vec<Complex64>, values: &mut Vec<Complex64>) {
        let (n, m) = (grid.n(), grid.m());
        debug_assert_eq!(n, self.n);
        let scale = n as f64;
        let zero = Complex64::new(0.0, 0.0);
        let pairs = m * (m + 1) / 2;
        buf.clear();
        buf.resize(pairs * n, zero);
        let mut chunks = buf.chunks_exact_mut(n.max(1));
        for a in 0..m {
            for b in a..m {
                let chunk = chunks.next().expect("one chunk per pair");
                for ((o, xa), xb) in chunk.iter_mut().zip(grid.column(a)).zip(grid.column(b)) {
                    *o = xa * xb.conj();
                }
            }
        }
        if !buf.is_empty() {
            self.backward(buf);
        }
        values.clear();
        values.resize(m * m * n, zero);
        let mut chunks = buf.chunks_exact(n.max(1));
        for a in 0..m {
            for b in a..m {
                let chunk = chunks.next().expect("one chunk per pair");
                let base_ab = (a * m + b) * n;
                let base_ba = (b * m + a) * n;
                for i in 0..n {
                    values[base_ab + i] = chunk[i] * scale;
                }
                if a != b {
                    for i in 0..n {
                        values[base_ba + i] = chunk[(n - i) % n].conj() * scale;
                    }
                }
            }
        }
    }
}

/// Peak weighted sidelobe over a raw `M^2 N` correlation slice.
pub(crate) fn peak_in(
    values: &[Complex64],
    n: usize,
    m: usize,
    weights: &LagWeights,
) -> Result<(f64, (usize, usize, usize))> {
    if weights.len() != n {
        return Err(Error::Dimension(format!("{} weights for N = {n}", weights.len())));
    }
    if weights.is_empty() {
        return Err(Error::EmptyWeights);
    }
    let mut best = (f64::NEG_INFINITY, (0, 0, 0));
    for (pair, chunk) in values.chunks_exact(n).enumerate() {
        for (i, r) in chunk.iter().enumerate() {
            let w = weights.get(i);
            if w == 0.0 {
                continue;
            }
            let v = w * r.norm_sqr().sqrt();
            if v > best.0 {
                best = (v, (pair / m, pair % m, i));
            }
        }
    }
    Ok(best)
}

/// Unnormalized forward DFT.
pub fn dft(v: &[Complex64]) -> Vec<Complex64> {
    let mut out = v.to_vec();
    if !out.is_empty() {
        Transform::new(out.len()).forward(&mut out);
    }
    out
}

/// Inverse DFT with the `1/N` factor.
pub fn idft(v: &[Complex64]) -> Vec<Complex64> {
    let mut out = v.to_vec();
    if !out.is_empty() {
        Transform::new(out.len()).backward(&mut out);
        let s = 1.0 / out.len() as f64;
        out.iter_mut().for_each(|z| *z *= s);
    }
    out
}

pub fn cyclic_correlations(grid: &SymbolGrid) -> CorrelationTensor {
    Transform::new(grid.n())
        .correlations(grid)
        .expect("transform sized from grid")
}

/// Peak weighted sidelobe `eta = max w_i |r_mki|` and the first index
/// attaining it in `(m, k, i)` lexicographic order.
pub fn peak_sidelobe(corr: &CorrelationTensor, weights: &LagWeights) -> Result<(f64, (usize, usize, usize))> {
    peak_in(&corr.values, corr.n(), corr.m(), weights)
}

/// Mean zero-lag autocorrelation `mean_m r_mm0`.
pub fn mainlobe(corr: &CorrelationTensor) -> f64 {
    (0..corr.m()).map(|m| corr.get(m, m, 0).re).sum::<f64>() / corr.m() as f64
}

/// `20 log10(eta / mean_m r_mm0)`.
pub fn psl_db(corr: &CorrelationTensor, weights: &LagWeights) -> Result<f64> {
    let main = mainlobe(corr);
    if main <= 0.0 {
        return Err(Error::ZeroMainlobe);
    }
    let (eta, _) = peak_sidelobe(corr, weights)?;
    Ok(20.0 * (eta / main).log10())
}
