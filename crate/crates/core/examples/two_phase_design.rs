//! Two-phase design: Phase-1 gains, then a filter search with the gains held.
//!
//! `cargo run --release --example two_phase_design -- [order]`

use flexacs::avionics::AvionicsParams;
use flexacs::designer::{constraint_residuals, two_phase_design, DesignContext, DesignSpec};
use flexacs::vehicle::ReferenceVehicle;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let order: u8 = std::env::args().nth(1).map_or(Ok(4), |s| s.parse())?;
    let ctx = DesignContext::new(ReferenceVehicle::default().nodes(), AvionicsParams::ksr3().blocks());
    let spec = DesignSpec {
        filter_order: order,
        ..DesignSpec::default()
    };
    let d = two_phase_design(&ctx, &spec)?;
    println!(
        "order {order}: worst peak1 {:.4} dB, feasible {}, violation {:.2e}, {} evaluations",
        d.objective_db, d.feasible, d.constraint_violation, d.iterations
    );
    println!("filter x = {:?}", d.filter.x);

    let worst = constraint_residuals(&d.schedule, &d.filter, &ctx, &spec)?
        .into_iter()
        .max_by(|a, b| a.value.total_cmp(&b.value));
    if let Some(c) = worst {
        println!("largest residual: {:?} at {} = {:.3e}", c.kind, c.index, c.value);
    }
    for (n, r) in ctx.nodes.iter().zip(&d.node_reports) {
        println!(
            "t = {:>4.1}: GM {:>6.2} dB  PM {:>6.2} deg  peak1 {:>7.2} dB",
            n.t,
            r.gm_db,
            r.pm_deg,
            r.peak1_db.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
