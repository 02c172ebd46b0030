//! PD gains that place the rigid-body roots, and the straight-line schedule
//! used before any filter is designed.

use std::f64::consts::PI;

use flexacs::avionics::AvionicsParams;
use flexacs::control::{gains_from_rigid_specs, rigid_specs_from_gains, RigidSpecs};
use flexacs::designer::{phase_one_schedule, DesignContext, DesignSpec};
use flexacs::vehicle::ReferenceVehicle;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let nodes = ReferenceVehicle::default().nodes();
    let spec = RigidSpecs::new(2.0 * PI * 0.5, 0.7)?;
    let ctx = DesignContext::new(nodes.clone(), AvionicsParams::ksr3().blocks());
    let sched = phase_one_schedule(&ctx, &DesignSpec::default())?;

    println!("{:>5} {:>8} {:>9} {:>9} {:>9} {:>9} {:>7}", "t", "M_delta", "k_p", "k_D", "sched k_p", "sched k_D", "zeta");
    for n in &nodes {
        let g = gains_from_rigid_specs(n.deriv.m_delta, spec)?;
        let s = sched.interpolate(n.t);
        let r = rigid_specs_from_gains(n.deriv.m_delta, s.kp, s.kd)?;
        println!(
            "{:>5.1} {:>8.3} {:>9.5} {:>9.5} {:>9.5} {:>9.5} {:>7.4}",
            n.t, n.deriv.m_delta, g.kp, g.kd, s.kp, s.kd, r.zeta_rb
        );
    }
    Ok(())
}
