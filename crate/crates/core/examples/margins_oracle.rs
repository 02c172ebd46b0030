//! Margins of a textbook loop, checked against closed forms.
//!
//! L(s) = 1 / (s (s + 1)^2): the phase crosses -180 deg at 1 rad/s where
//! |L| = 1/2, so GM = 20 log10 2.

use flexacs::lti::{FrequencyGrid, RationalTf};
use flexacs::loop_analysis::{bode, margins, nyquist};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let l = RationalTf::from_coeffs(&[1.0], &[0.0, 1.0, 2.0, 1.0])?;
    let grid = FrequencyGrid::log(1e-4, 100.0, 200)?;
    let r = margins(&l, &grid)?;
    println!("GM {:.4} dB at {:.6} rad/s", r.gm_db, r.gm_freq.unwrap_or(f64::NAN));
    println!("PM {:.4} deg at {:.6} rad/s", r.pm_deg, r.pm_freq.unwrap_or(f64::NAN));
    println!("closed form GM {:.4} dB", 20.0 * 2f64.log10());

    let ny = nyquist(&l, &grid)?;
    println!(
        "Nyquist: P = {}, origin poles {:?}, closed-loop RHP {:?}",
        ny.open_loop_unstable, ny.origin_poles, ny.closed_loop_unstable
    );

    let table = bode(&l, &grid)?;
    for p in table.iter().step_by(table.len() / 6) {
        println!("{:>10.4} rad/s {:>9.3} dB {:>9.2} deg", p.omega_rad_s, p.mag_db, p.phase_deg);
    }
    Ok(())
}
