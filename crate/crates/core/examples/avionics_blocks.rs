//! Actuator, gyro, filter and delay blocks of the reference avionics.

use flexacs::avionics::AvionicsParams;
fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = AvionicsParams::ksr3();
    let b = p.blocks();
    let blocks = [
        ("actuator", &b.actuator),
        ("actuator accel", &b.actuator_accel),
        ("gyro", &b.gyro),
        ("vibration filter", &b.vf),
        ("delay", &b.delay),
        ("DAC hold", &b.dac_zoh),
    ];
    for (name, tf) in blocks {
        println!(
            "{name:<16} num deg {} den deg {} DC {:.6}",
            tf.num().degree(),
            tf.den().degree(),
            tf.dc_gain().unwrap_or(f64::NAN)
        );
    }
    println!("gyro peak at {:.2} rad/s: {:.6}", p.gyro.omega, b.gyro.freq_response(p.gyro.omega)?.norm());

    println!("{:>10} {:>10} {:>10}", "rad/s", "|delay|", "phase deg");
    for w in [1.0, 10.0, 50.0, 100.0, 300.0, 1000.0] {
        let h = b.delay.freq_response(w)?;
        println!("{w:>10.3} {:>10.6} {:>10.2}", h.norm(), h.arg().to_degrees());
    }
    Ok(())
}
