//! Parametric bending filters of orders 2 to 6 and what they do to the
//! first bending peak at lift-off.

use flexacs::avionics::AvionicsParams;
use flexacs::control::{structure, FilterParams};
use flexacs::designer::{phase_one_schedule, DesignContext, DesignSpec};
use flexacs::loop_analysis::{margins, LoopFilter, LoopModel};
use flexacs::vehicle::ReferenceVehicle;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ctx = DesignContext::new(ReferenceVehicle::default().nodes(), AvionicsParams::ksr3().blocks());
    let sched = phase_one_schedule(&ctx, &DesignSpec::default())?;
    let node = &ctx.nodes[0];
    let g = sched.interpolate(node.t);
    let wb = node.omega_b1;

    let unfiltered = LoopModel::for_node(node, &ctx.blocks, g.kp, g.kd, LoopFilter::Unity, ctx.plant)?;
    let r = margins(&unfiltered, &ctx.grid)?;
    println!(
        "no filter: peak1 {:.2} dB, GM {:.2} dB, PM {:.2} deg",
        r.peak1_db.unwrap_or(f64::NAN),
        r.gm_db,
        r.pm_deg
    );

    for order in 2u8..=6 {
        let (q, real) = structure(order)?;
        // Notch on the first bending mode, remaining factors neutral.
        let mut f = FilterParams::neutral(order, wb, 0.5)?;
        f.x[0] = wb;
        f.x[q] = 0.05;
        let m = LoopModel::for_node(node, &ctx.blocks, g.kp, g.kd, LoopFilter::Params(f.clone()), ctx.plant)?;
        let r = margins(&m, &ctx.grid)?;
        println!(
            "order {order} ({q} quadratic, {real} real): hf gain {:.3}, |F(j wb)| {:.4}, peak1 {:.2} dB, PM {:.2} deg",
            f.hf_gain(),
            f.freq_response(wb).norm(),
            r.peak1_db.unwrap_or(f64::NAN),
            r.pm_deg
        );
    }
    Ok(())
}
