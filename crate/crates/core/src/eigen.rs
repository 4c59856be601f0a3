//! Eigenvalues of small dense Hermitian matrices.
//!
//! Full spectra use cyclic Jacobi: each pivot `(p, q)` first rotates the
//! phase of row/column `q` so the off-diagonal entry is real, then applies
//! the classical real rotation. The largest eigenvalue alone goes through
//! Householder tridiagonalization and Sturm-count bisection, which returns
//! the upper end of the final bracket.

use num_complex::Complex64;

use crate::{Error, Result};

const MAX_SWEEPS: usize = 64;
const SYMMETRY_TOL: f64 = 1e-9;
const OFF_TOL: f64 = 1e-13;

fn frobenius(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn check_square(len: usize, dim: usize) -> Result<()> {
    if dim == 0 || len != dim * dim {
        return Err(Error::Dimension(format!("{len} entries for a {dim} x {dim} matrix")));
    }
    Ok(())
}

fn check_hermitian(a: &[Complex64], dim: usize) -> Result<()> {
    check_square(a.len(), dim)?;
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("eigenvalue input"));
    }
    let scale = frobenius(a);
    let mut dev = 0.0f64;
    for i in 0..dim {
        for j in i..dim {
            dev = dev.max((a[i * dim + j] - a[j * dim + i].conj()).norm());
        }
    }
    if dev > SYMMETRY_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NotSymmetric(dev / scale));
    }
    Ok(())
}

/// All eigenvalues, ascending. `a` is row-major `dim x dim` and must be
/// Hermitian to within `1e-9` of its Frobenius norm.
pub fn hermitian_eigenvalues(a: &[Complex64], dim: usize) -> Result<Vec<f64>> {
    check_hermitian(a, dim)?;
    let scale = frobenius(a);
    let mut w = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        w[i * dim + i] = Complex64::new(a[i * dim + i].re, 0.0);
        for j in i + 1..dim {
            let h = (a[i * dim + j] + a[j * dim + i].conj()) * 0.5;
            w[i * dim + j] = h;
            w[j * dim + i] = h.conj();
        }
    }
    if dim == 1 || scale == 0.0 {
        let mut d: Vec<f64> = (0..dim).map(|i| w[i * dim + i].re).collect();
        d.sort_by(f64::total_cmp);
        return Ok(d);
    }

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..dim)
            .flat_map(|i| (0..dim).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| w[i * dim + j].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= OFF_TOL * scale {
            converged = true;
            break;
        }
        for p in 0..dim - 1 {
            for q in p + 1..dim {
                rotate(&mut w, dim, p, q);
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence(MAX_SWEEPS));
    }
    let mut d: Vec<f64> = (0..dim).map(|i| w[i * dim + i].re).collect();
    d.sort_by(f64::total_cmp);
    Ok(d)
}

fn rotate(w: &mut [Complex64], dim: usize, p: usize, q: usize) {
    let apq = w[p * dim + q];
    let g = apq.norm();
    if g == 0.0 {
        return;
    }
    // phase step: column q times conj(e), row q times e
    let d = (apq / g).conj();
    for r in 0..dim {
        if r != q {
            w[r * dim + q] *= d;
            w[q * dim + r] = w[r * dim + q].conj();
        }
    }
    let app = w[p * dim + p].re;
    let aqq = w[q * dim + q].re;
    let theta = (aqq - app) / (2.0 * g);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    w[p * dim + p] = Complex64::new(app - t * g, 0.0);
    w[q * dim + q] = Complex64::new(aqq + t * g, 0.0);
    w[p * dim + q] = Complex64::new(0.0, 0.0);
    w[q * dim + p] = Complex64::new(0.0, 0.0);
    for r in 0..dim {
        if r == p || r == q {
            continue;
        }
        let arp = w[r * dim + p];
        let arq = w[r * dim + q];
        let np = arp * c - arq * s;
        let nq = arp * s + arq * c;
        w[r * dim + p] = np;
        w[r * dim + q] = nq;
        w[p * dim + r] = np.conj();
        w[q * dim + r] = nq.conj();
    }
}

pub fn hermitian_max_eigenvalue(a: &[Complex64], dim: usize) -> Result<f64> {
    check_hermitian(a, dim)?;
    Ok(MaxEigen::new(dim).largest(a))
}

/// Reusable buffers for repeated largest-eigenvalue solves of one size.
/// Input is trusted to be finite and Hermitian.
#[derive(Clone, Debug)]
pub struct MaxEigen {
    dim: usize,
    w: Vec<Complex64>,
    v: Vec<Complex64>,
    p: Vec<Complex64>,
    d: Vec<f64>,
    e: Vec<f64>,
}

impl MaxEigen {
    pub fn new(dim: usize) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Self {
            dim,
            w: vec![zero; dim * dim],
            v: vec![zero; dim],
            p: vec![zero; dim],
            d: vec![0.0; dim],
            e: vec![0.0; dim.saturating_sub(1)],
        }
    }

    /// Upper end of the final bisection bracket around the largest
    /// eigenvalue of the row-major `a`.
    pub fn largest(&mut self, a: &[Complex64]) -> f64 {
        debug_assert_eq!(a.len(), self.dim * self.dim);
        self.w.copy_from_slice(a);
        self.tridiagonalize();
        largest_tridiagonal(&self.d, &self.e)
    }

    /// `true` when `x I - a` is positive definite, i.e. every eigenvalue of
    /// `a` lies strictly below `x` (Cholesky with early exit).
    pub fn all_below(&mut self, a: &[Complex64], x: f64) -> bool {
        let dim = self.dim;
        let l = &mut self.w;
        for j in 0..dim {
            let mut dj = x - a[j * dim + j].re;
            for k in 0..j {
                dj -= l[j * dim + k].norm_sqr();
            }
            if dj.is_nan() || dj <= 0.0 {
                return false;
            }
            let ljj = dj.sqrt();
            l[j * dim + j] = Complex64::new(ljj, 0.0);
            for i in j + 1..dim {
                let mut acc = -a[i * dim + j];
                for k in 0..j {
                    acc -= l[i * dim + k] * l[j * dim + k].conj();
                }
                l[i * dim + j] = acc / ljj;
            }
        }
        true
    }

    /// Householder reduction of `w` to a real tridiagonal `(d, e)` with
    /// the same spectrum (`e` holds off-diagonal magnitudes).
    fn tridiagonalize(&mut self) {
        let dim = self.dim;
        let (w, v, p, e) = (&mut self.w, &mut self.v, &mut self.p, &mut self.e);
        for k in 0..dim.saturating_sub(2) {
            let alpha = (k + 1..dim).map(|i| w[i * dim + k].norm_sqr()).sum::<f64>().sqrt();
            e[k] = alpha;
            if alpha == 0.0 {
                continue;
            }
            let x0 = w[(k + 1) * dim + k];
            let r0 = x0.norm_sqr().sqrt();
            let phase = if r0 > 0.0 { x0 / r0 } else { Complex64::new(1.0, 0.0) };
            for i in k + 1..dim {
                v[i] = w[i * dim + k];
            }
            v[k + 1] += phase * alpha;
            let vv: f64 = (k + 1..dim).map(|i| v[i].norm_sqr()).sum();
            let tau = 2.0 / vv;
            // p = tau B v, q = p - (tau/2)(v^H p) v, B <- B - v q^H - q v^H
            for i in k + 1..dim {
                p[i] = (k + 1..dim).map(|j| w[i * dim + j] * v[j]).sum::<Complex64>() * tau;
            }
            let kk = (k + 1..dim).map(|i| v[i].conj() * p[i]).sum::<Complex64>() * (0.5 * tau);
            for i in k + 1..dim {
                p[i] -= kk * v[i];
            }
            for i in k + 1..dim {
                for j in k + 1..dim {
                    w[i * dim + j] -= v[i] * p[j].conj() + p[i] * v[j].conj();
                }
            }
        }
        if dim >= 2 {
            e[dim - 2] = w[(dim - 1) * dim + dim - 2].norm_sqr().sqrt();
        }
        for i in 0..dim {
            self.d[i] = w[i * dim + i].re;
        }
    }
}

/// Number of eigenvalues of the tridiagonal `(d, e)` below `x`.
fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..d.len() {
        let off = if i == 0 { 0.0 } else { e[i - 1] * e[i - 1] };
        q = d[i] - x - if i == 0 { 0.0 } else { off / q };
        if q == 0.0 {
            q = -f64::EPSILON * (x.abs() + f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Cheap upper bound on the largest eigenvalue of a Hermitian `a`: the
/// smaller of the Gershgorin bound (with `|re| + |im|` for each modulus)
/// and `tr/n + s sqrt(n - 1)` with `s^2 = |a|_F^2 / n - (tr/n)^2`.
pub fn hermitian_upper_bound(a: &[Complex64], dim: usize) -> f64 {
    let mut gersh = f64::NEG_INFINITY;
    let mut trace = 0.0;
    let mut fro2 = 0.0;
    for i in 0..dim {
        let mut off = 0.0;
        for j in 0..dim {
            let z = a[i * dim + j];
            fro2 += z.norm_sqr();
            if j != i {
                off += z.re.abs() + z.im.abs();
            }
        }
        let d = a[i * dim + i].re;
        trace += d;
        gersh = gersh.max(d + off);
    }
    let n = dim as f64;
    let mean = trace / n;
    let spread = (fro2 / n - mean * mean).max(0.0).sqrt() * (n - 1.0).sqrt();
    // slack for rounding in the moment bound
    gersh.min(mean + spread * (1.0 + 1e-12) + 1e-12 * fro2.sqrt())
}

fn largest_tridiagonal(d: &[f64], e: &[f64]) -> f64 {
    let n = d.len();
    let radius = |i: usize| (if i > 0 { e[i - 1] } else { 0.0 }) + if i + 1 < n { e[i] } else { 0.0 };
    let mut lo = (0..n).map(|i| d[i] - radius(i)).fold(f64::INFINITY, f64::min);
    let mut hi = (0..n).map(|i| d[i] + radius(i)).fold(f64::NEG_INFINITY, f64::max);
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    while hi - lo > 4.0 * f64::EPSILON * scale {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(d, e, mid) == n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Eigenvalues of a real symmetric row-major matrix, ascending.
pub fn symmetric_eigenvalues(s: &[f64], dim: usize) -> Result<Vec<f64>> {
    let a: Vec<Complex64> = s.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    hermitian_eigenvalues(&a, dim)
}

pub fn symmetric_max_eigenvalue(s: &[f64], dim: usize) -> Result<f64> {
    Ok(*symmetric_eigenvalues(s, dim)?.last().expect("dim >= 1"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        let l = symmetric_eigenvalues(&[2.0, 1.0, 1.0, 2.0], 2).unwrap();
        assert!((l[0] - 1.0).abs() < 1e-14 && (l[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_and_scalar() {
        assert_eq!(symmetric_max_eigenvalue(&[5.0], 1).unwrap(), 5.0);
        let l = symmetric_eigenvalues(&[1.0, 0.0, 0.0, 0.0, -4.0, 0.0, 0.0, 0.0, 2.0], 3).unwrap();
        assert_eq!(l, vec![-4.0, 1.0, 2.0]);
    }

    #[test]
    fn pauli_y() {
        let j = Complex64::new(0.0, 1.0);
        let z = Complex64::new(0.0, 0.0);
        let l = hermitian_eigenvalues(&[z, -j, j, z], 2).unwrap();
        assert!((l[0] + 1.0).abs() < 1e-14 && (l[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn trace_is_preserved() {
        let dim = 6;
        let mut a = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let v = Complex64::new(
                    ((i * 7 + j * 3) % 5) as f64 - 2.0,
                    if i == j { 0.0 } else { (i + 2 * j) as f64 * 0.1 },
                );
                a[i * dim + j] = v;
                a[j * dim + i] = v.conj();
            }
        }
        let l = hermitian_eigenvalues(&a, dim).unwrap();
        let tr: f64 = (0..dim).map(|i| a[i * dim + i].re).sum();
        let fro2: f64 = a.iter().map(|z| z.norm_sqr()).sum();
        assert!((l.iter().sum::<f64>() - tr).abs() < 1e-12);
        assert!((l.iter().map(|v| v * v).sum::<f64>() - fro2).abs() < 1e-10);
    }

    #[test]
    fn largest_matches_jacobi() {
        for dim in 1..=9 {
            let mut a = vec![Complex64::new(0.0, 0.0); dim * dim];
            for i in 0..dim {
                for j in i..dim {
                    let v = Complex64::new(
                        ((i * 5 + j * 11) % 7) as f64 - 3.0,
                        if i == j {
                            0.0
                        } else {
                            ((i * 3 + j) % 5) as f64 * 0.3 - 0.6
                        },
                    );
                    a[i * dim + j] = v;
                    a[j * dim + i] = v.conj();
                }
            }
            let want = *hermitian_eigenvalues(&a, dim).unwrap().last().unwrap();
            let got = hermitian_max_eigenvalue(&a, dim).unwrap();
            assert!(
                got >= want - 1e-12 && got - want <= 1e-12 * want.abs().max(1.0),
                "dim {dim}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn bound_and_definiteness_test() {
        let dim = 5;
        let mut a = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let v = Complex64::new(
                    ((i * 3 + j * 5) % 7) as f64 - 2.5,
                    if i == j { 0.0 } else { 0.4 * (j - i) as f64 },
                );
                a[i * dim + j] = v;
                a[j * dim + i] = v.conj();
            }
        }
        let top = hermitian_max_eigenvalue(&a, dim).unwrap();
        assert!(hermitian_upper_bound(&a, dim) >= top);
        let mut solver = MaxEigen::new(dim);
        assert!(solver.all_below(&a, top + 1e-9));
        assert!(!solver.all_below(&a, top - 1e-9));
        assert!((solver.largest(&a) - top).abs() < 1e-12);
    }

    #[test]
    fn largest_of_repeated_and_zero() {
        let z = Complex64::new(0.0, 0.0);
        assert_eq!(hermitian_max_eigenvalue(&[z; 16], 4).unwrap(), 0.0);
        let mut a = vec![z; 9];
        for i in 0..3 {
            a[i * 3 + i] = Complex64::new(2.0, 0.0);
        }
        assert!((hermitian_max_eigenvalue(&a, 3).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_asymmetric() {
        assert!(matches!(
            symmetric_eigenvalues(&[1.0, 2.0, 0.0, 1.0], 2),
            Err(Error::NotSymmetric(_))
        ));
        assert!(symmetric_eigenvalues(&[1.0, 2.0, 3.0], 2).is_err());
    }
}
