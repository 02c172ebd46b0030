//! Joint gain and filter design, started from the two-phase result.
//!
//! `cargo run --release --example integrated_design -- [order]`

use flexacs::avionics::AvionicsParams;
use flexacs::designer::{integrated_design_warm, two_phase_design, DesignContext, DesignSpec};
use flexacs::vehicle::ReferenceVehicle;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let order: u8 = std::env::args().nth(1).map_or(Ok(4), |s| s.parse())?;
    let ctx = DesignContext::new(ReferenceVehicle::default().nodes(), AvionicsParams::ksr3().blocks());
    let spec = DesignSpec {
        filter_order: order,
        ..DesignSpec::default()
    };
    let tp = two_phase_design(&ctx, &spec)?;
    println!("two-phase:  {:.4} dB", tp.objective_db);

    let s1 = integrated_design_warm(&ctx, &spec, &tp, None)?;
    println!("subcase 1:  {:.4} dB ({} gain knots)", s1.objective_db, s1.schedule.times.len());

    let s2_spec = DesignSpec { subcase: 2, ..spec };
    let s2 = integrated_design_warm(&ctx, &s2_spec, &tp, Some(&s1))?;
    println!("subcase 2:  {:.4} dB ({} gain knots)", s2.objective_db, s2.schedule.times.len());

    println!("{:>5} {:>9} {:>9}", "t", "k_p", "k_D");
    for (i, t) in s2.schedule.times.iter().enumerate() {
        println!("{t:>5.1} {:>9.5} {:>9.5}", s2.schedule.kp_values[i], s2.schedule.kd_values[i]);
    }
    Ok(())
}
