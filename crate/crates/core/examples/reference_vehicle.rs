//! Reference vehicle over the flight, with Phase-1 gains and no filter.

use flexacs::avionics::AvionicsParams;
use flexacs::designer::{phase_one_schedule, DesignContext, DesignSpec};
use flexacs::loop_analysis::{margins, LoopFilter, LoopModel};
use flexacs::vehicle::ReferenceVehicle;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ctx = DesignContext::new(ReferenceVehicle::default().nodes(), AvionicsParams::ksr3().blocks());
    let sched = phase_one_schedule(&ctx, &DesignSpec::default())?;
    println!(
        "{:>5} {:>7} {:>7} {:>8} {:>8} {:>8} {:>8} {:>7}",
        "t", "M_a", "M_d", "wb1", "GM dB", "PM deg", "peak1", "stable"
    );
    for n in &ctx.nodes {
        let g = sched.interpolate(n.t);
        let m = LoopModel::for_node(n, &ctx.blocks, g.kp, g.kd, LoopFilter::Unity, ctx.plant)?;
        let r = margins(&m, &ctx.grid)?;
        println!(
            "{:>5.1} {:>7.3} {:>7.3} {:>8.3} {:>8.3} {:>8.3} {:>8.3} {:>7}",
            n.t,
            n.deriv.m_alpha,
            n.deriv.m_delta,
            n.omega_b1,
            r.gm_db,
            r.pm_deg,
            r.peak1_db.unwrap_or(f64::NAN),
            r.stable_closed_loop
        );
    }
    Ok(())
}
