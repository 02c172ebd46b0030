use super::{SloshMode, VehicleError};

/// First root of `J1'` used by the cylindrical-tank slosh pendulum.
pub const SLOSH_ROOT: f64 = 1.84;

/// Pendulum analog of the first slosh mode in a cylindrical tank.
///
/// `radius` and `fill_height` in m, `propellant_mass` in kg, `pivot` in m
/// (positive forward of the dry center of mass).
pub fn slosh_from_tank(
    a_x: f64,
    radius: f64,
    fill_height: f64,
    propellant_mass: f64,
    zeta: f64,
    pivot: f64,
) -> Result<SloshMode, VehicleError> {
    if !(a_x > 0.0) {
        return Err(VehicleError::NonPositiveInput("a_x"));
    }
    if !(radius > 0.0) {
        return Err(VehicleError::NonPositiveInput("tank radius"));
    }
    if !(fill_height > 0.0) {
        return Err(VehicleError::NonPositiveInput("fill height"));
    }
    if !(propellant_mass > 0.0) {
        return Err(VehicleError::NonPositiveInput("propellant mass"));
    }
    if !(zeta >= 0.0) {
        return Err(VehicleError::NonPositiveInput("slosh damping"));
    }
    let xi = SLOSH_ROOT;
    let th = (fill_height * xi / radius).tanh();
    let omega = (a_x / radius * xi * th).sqrt();
    let length = a_x / (omega * omega);
    let mass = 2.0 * radius * th / (fill_height * xi * (xi * xi - 1.0)) * propellant_mass;
    Ok(SloshMode {
        omega,
        zeta,
        mass,
        pivot,
        length,
    })
}
