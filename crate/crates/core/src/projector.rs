//! Projections onto the similarity regions around reference symbols.
//!
//! PSK: the wedge `|arg(z) - arg(x_r)| <= eps_p` between the inner chord
//! through `G, H = (1-eps_a) x_r e^{±j eps_p} / cos(eps_p)` and the outer
//! chord through `Q, R = x_r e^{±j eps_p} / cos(eps_p)`, tangent to the unit
//! circle at `x_r`. Outputs keep `|arg(z) - arg(x_r)| <= eps_p` and
//! `1-eps_a <= |z| <= 1/cos(eps_p)`. The candidate is classified by its projected length
//! `P = Re(conj(z) x_r)` and by whether it falls outside the angular wedge
//! (`|z - P x_r| > P tan eps_p`).
//!
//! QAM: the closed disc of radius `eps_r` around `x_r`.
//!
//! Unused sub-carriers are only clamped: unit disc for PSK, the square of
//! half-width `sqrt(Q) - 1` for QAM.

use num_complex::Complex64;

use crate::constellation::{ConstellationSpec, Family, SubcarrierMask};
use crate::spectrum::SymbolGrid;
use crate::{Error, Result};

/// Slack on `P` when choosing a case, so boundary points map to themselves.
const BOUNDARY_TOL: f64 = 1e-12;
const UNIT_TOL: f64 = 1e-9;

/// PSK similarity projection of one entry. `x_r` must be unit modulus.
pub fn psk_project_entry(z: Complex64, xr: Complex64, eps_a: f64, eps_p: f64) -> Result<Complex64> {
    if (xr.norm() - 1.0).abs() > UNIT_TOL {
        return Err(Error::InvalidParameter(format!(
            "PSK reference |x_r| = {} is not 1",
            xr.norm()
        )));
    }
    let j = Complex64::new(0.0, 1.0);
    let rot_p = Complex64::from_polar(1.0, eps_p);
    let rot_m = rot_p.conj();
    let inner = 1.0 - eps_a;
    let cos_p = eps_p.cos();
    let p = (z.conj() * xr).re;
    let outside = (z - xr * p).norm() > p * eps_p.tan();

    if p > 1.0 + BOUNDARY_TOL {
        if outside {
            let (a, b) = (xr * rot_p, xr * rot_m);
            return Ok(if (z - a).norm() <= (z - b).norm() { a } else { b });
        }
        return Ok(z / z.norm());
    }
    if p >= inner - BOUNDARY_TOL {
        if outside {
            let (a, b) = (xr * rot_p, xr * rot_m);
            let side = if (z.conj() * a).re > (z.conj() * b).re { a } else { b };
            return Ok(side * (p / cos_p));
        }
        return Ok(z);
    }
    let g = xr * rot_p * (inner / cos_p);
    let h = xr * rot_m * (inner / cos_p);
    if p >= 0.0 {
        if outside {
            return Ok(if (z - g).norm() <= (z - h).norm() { g } else { h });
        }
        let r = z.norm();
        return Ok(if r == 0.0 { xr * inner } else { z * (inner / r) });
    }
    // behind the origin: nearest point of the inner segment G-H
    let u = -j * xr;
    let along = (u.conj() * (z - g)).re;
    if along < 0.0 {
        return Ok(g);
    }
    if ((j * xr).conj() * (z - h)).re < 0.0 {
        return Ok(h);
    }
    Ok(g + u * along)
}

/// Disc of radius `eps_r` around `x_r`.
pub fn qam_project_entry(z: Complex64, xr: Complex64, eps_r: f64) -> Complex64 {
    let d = z - xr;
    let r = d.norm();
    if r <= eps_r {
        z
    } else {
        xr + d * (eps_r / r)
    }
}

/// Clamp for an idle sub-carrier.
pub fn clamp_unused(z: Complex64, spec: &ConstellationSpec) -> Complex64 {
    match spec.family {
        Family::Psk => {
            let r = z.norm();
            if r > 1.0 {
                z / r
            } else {
                z
            }
        }
        Family::Qam => {
            let lim = spec.qam_max_level();
            let d = z.re.abs().max(z.im.abs());
            if d > lim {
                z * (lim / d)
            } else {
                z
            }
        }
    }
}

/// Feasibility test matching [`project_grid`], with tolerance `tol`.
pub fn is_feasible(z: Complex64, xr: Complex64, used: bool, spec: &ConstellationSpec, tol: f64) -> bool {
    match (spec.family, used) {
        (Family::Psk, true) => {
            let eps_p = spec.eps_p();
            let r = z.norm();
            let dphi = (z * xr.conj()).arg().abs();
            r >= 1.0 - spec.eps_a - tol && r <= 1.0 / eps_p.cos() + tol && dphi <= eps_p + tol
        }
        (Family::Qam, true) => (z - xr).norm() <= spec.eps_r() + tol,
        (Family::Psk, false) => z.norm() <= 1.0 + tol,
        (Family::Qam, false) => z.re.abs().max(z.im.abs()) <= spec.qam_max_level() + tol,
    }
}

/// Entry-wise projection of a whole grid.
pub fn project_grid(
    x: &SymbolGrid,
    reference: &SymbolGrid,
    mask: &SubcarrierMask,
    spec: &ConstellationSpec,
) -> Result<SymbolGrid> {
    if !x.same_shape(reference) || x.n() != mask.n() || x.m() != mask.m() {
        return Err(Error::Dimension("grid, reference and mask shapes differ".into()));
    }
    let eps_p = spec.eps_p();
    let eps_r = spec.eps_r();
    let mut out = Vec::with_capacity(x.stacked().len());
    for ((z, xr), used) in x.stacked().iter().zip(reference.stacked()).zip(mask.stacked()) {
        let v = match (spec.family, *used) {
            (_, false) => clamp_unused(*z, spec),
            (Family::Psk, true) => psk_project_entry(*z, *xr, spec.eps_a, eps_p)?,
            (Family::Qam, true) => qam_project_entry(*z, *xr, eps_r),
        };
        out.push(v);
    }
    SymbolGrid::from_stacked(x.n(), x.m(), out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const EA: f64 = 0.2;
    fn ep() -> f64 {
        2.0 * PI * 0.15 / 4.0
    }

    #[test]
    fn reference_is_fixed_point() {
        let xr = Complex64::from_polar(1.0, PI / 4.0);
        assert_eq!(psk_project_entry(xr, xr, EA, ep()).unwrap(), xr);
    }

    #[test]
    fn far_outward_clips_to_arc() {
        let xr = c(1.0, 0.0);
        let z = c(10.0, 0.0);
        assert!((psk_project_entry(z, xr, EA, ep()).unwrap() - xr).norm() < 1e-15);
        let z = Complex64::from_polar(3.0, 1.2);
        let out = psk_project_entry(z, xr, EA, ep()).unwrap();
        assert!((out - Complex64::from_polar(1.0, ep())).norm() < 1e-12);
    }

    #[test]
    fn origin_goes_to_inner_point() {
        let xr = c(0.0, 1.0);
        let out = psk_project_entry(c(0.0, 0.0), xr, EA, ep()).unwrap();
        assert!((out - xr * (1.0 - EA)).norm() < 1e-15);
    }

    #[test]
    fn behind_origin_lands_on_inner_segment() {
        let xr = c(1.0, 0.0);
        let g = xr * Complex64::from_polar(1.0, ep()) * ((1.0 - EA) / ep().cos());
        let out = psk_project_entry(c(-1.0, 0.0), xr, EA, ep()).unwrap();
        assert!((out - c(1.0 - EA, 0.0)).norm() < 1e-12);
        let out = psk_project_entry(c(-1.0, 5.0), xr, EA, ep()).unwrap();
        assert!((out - g).norm() < 1e-12);
    }

    #[test]
    fn rejects_non_unit_reference() {
        assert!(psk_project_entry(c(1.0, 0.0), c(2.0, 0.0), EA, ep()).is_err());
    }

    #[test]
    fn qam_disc() {
        let xr = c(1.0, -3.0);
        assert_eq!(qam_project_entry(c(1.1, -3.0), xr, 0.3), c(1.1, -3.0));
        let out = qam_project_entry(c(2.0, -3.0), xr, 0.3);
        assert!((out - c(1.3, -3.0)).norm() < 1e-15);
    }

    #[test]
    fn unused_clamps() {
        let psk = ConstellationSpec::qpsk(0.15, EA).unwrap();
        assert!((clamp_unused(c(3.0, 4.0), &psk) - c(0.6, 0.8)).norm() < 1e-15);
        assert_eq!(clamp_unused(c(0.3, 0.4), &psk), c(0.3, 0.4));
        let qam = ConstellationSpec::new(Family::Qam, 16, 0.15, EA).unwrap();
        assert_eq!(clamp_unused(c(6.0, 1.0), &qam), c(3.0, 0.5));
    }

    #[test]
    fn outputs_feasible_and_idempotent() {
        let spec = ConstellationSpec::qpsk(0.15, EA).unwrap();
        for k in 0..4 {
            let xr = spec.point(k);
            for a in 0..60 {
                for r in [0.0, 0.3, 0.79, 0.8, 0.95, 1.0, 1.02, 1.4, 3.0] {
                    let z = Complex64::from_polar(r, a as f64 * PI / 30.0);
                    let out = psk_project_entry(z, xr, EA, spec.eps_p()).unwrap();
                    assert!(is_feasible(out, xr, true, &spec, 1e-9), "z={z} out={out}");
                    let again = psk_project_entry(out, xr, EA, spec.eps_p()).unwrap();
                    assert!((again - out).norm() < 1e-9, "z={z} out={out} again={again}");
                }
            }
        }
    }
}
