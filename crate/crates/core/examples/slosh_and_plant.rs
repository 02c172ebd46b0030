//! Slosh pendulum from tank geometry, then the plant of one reference node.

use flexacs::vehicle::{assemble_plant, slosh_from_tank, state_layout, PlantOptions, ReferenceVehicle};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // 29.4 m/s^2 axial acceleration, 0.5 m radius, 1 m fill, 1000 kg.
    let s = slosh_from_tank(29.4, 0.5, 1.0, 1000.0, 0.0, 0.0)?;
    println!("slosh: omega {:.4} rad/s, L_p {:.5} m, m_p {:.2} kg", s.omega, s.length, s.mass);

    let node = ReferenceVehicle::default().node(30.0);
    let layout = state_layout(&node);
    let plant = assemble_plant(&node, PlantOptions::default())?;
    println!(
        "t = {} s: {} states ({} bending, {} slosh), {} inputs, {} outputs",
        node.t,
        plant.states(),
        node.bending.len(),
        node.slosh.len(),
        plant.inputs(),
        plant.outputs()
    );
    println!("state layout: {layout:?}");
    let mut poles = plant.eigenvalues();
    poles.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    for p in poles {
        println!("  pole {:+.4} {:+.4}j", p.re, p.im);
    }
    for w in [1.0, 10.0, node.omega_b1] {
        let h = plant.freq_response(w)?;
        println!("|q/delta| at {w:.2} rad/s: rigid {:.4e}, sensed {:.4e}", h[(0, 0)].norm(), h[(1, 0)].norm());
    }
    Ok(())
}
