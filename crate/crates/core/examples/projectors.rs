//! Walk a few candidate points through the PSK wedge and QAM disc
//! projections.
//!
//! cargo run --example projectors

use std::f64::consts::PI;

use jcas::constellation::{ConstellationSpec, Family};
use jcas::projector::{is_feasible, psk_project_entry, qam_project_entry};
use jcas::Complex64;

fn main() -> jcas::Result<()> {
    let psk = ConstellationSpec::qpsk(0.15, 0.2)?;
    let xr = psk.point(0);
    println!(
        "QPSK x_r = {xr:.4}, eps_a = {}, eps_p = {:.4} rad",
        psk.eps_a,
        psk.eps_p()
    );
    for (r, phi) in [(0.0, 0.0), (0.5, 0.1), (0.9, 0.0), (1.3, 0.0), (1.3, 0.6), (2.0, PI)] {
        let z = xr * Complex64::from_polar(r, phi);
        let out = psk_project_entry(z, xr, psk.eps_a, psk.eps_p())?;
        println!(
            "  z = {z:.3} -> {out:.4}  |out| = {:.4}, feasible {}",
            out.norm(),
            is_feasible(out, xr, true, &psk, 1e-12)
        );
    }

    let qam = ConstellationSpec::new(Family::Qam, 16, 0.15, 0.2)?;
    let xr = qam.point(5);
    println!("16-QAM x_r = {xr}, eps_r = {:.4}", qam.eps_r());
    for d in [
        Complex64::new(0.1, 0.0),
        Complex64::new(0.5, 0.5),
        Complex64::new(-2.0, 0.3),
    ] {
        let out = qam_project_entry(xr + d, xr, qam.eps_r());
        println!("  z = {:.3} -> {out:.4}  distance {:.4}", xr + d, (out - xr).norm());
    }
    Ok(())
}
