use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{LoopError, LoopFilter, LoopModel};
use crate::control::pd_tf;
use crate::lti::{RationalTf, StateSpace};

/// `second` driven by `first`.
fn series(first: &StateSpace, second: &StateSpace) -> StateSpace {
    let (n1, n2) = (first.states(), second.states());
    let n = n1 + n2;
    let mut a = DMatrix::zeros(n, n);
    a.view_mut((0, 0), (n1, n1)).copy_from(&first.a);
    a.view_mut((n1, 0), (n2, n1)).copy_from(&(&second.b * &first.c));
    a.view_mut((n1, n1), (n2, n2)).copy_from(&second.a);
    let mut b = DMatrix::zeros(n, first.inputs());
    b.view_mut((0, 0), (n1, first.inputs())).copy_from(&first.b);
    b.view_mut((n1, 0), (n2, first.inputs())).copy_from(&(&second.b * &first.d));
    let mut c = DMatrix::zeros(second.outputs(), n);
    c.view_mut((0, 0), (second.outputs(), n1)).copy_from(&(&second.d * &first.c));
    c.view_mut((0, n1), (second.outputs(), n2)).copy_from(&second.c);
    let d = &second.d * &first.d;
    StateSpace::new(a, b, c, d).expect("series dimensions agree")
}

/// One input fanned out to two SISO systems, outputs stacked.
fn fan_out(top: &StateSpace, bottom: &StateSpace) -> StateSpace {
    let (n1, n2) = (top.states(), bottom.states());
    let n = n1 + n2;
    let mut a = DMatrix::zeros(n, n);
    a.view_mut((0, 0), (n1, n1)).copy_from(&top.a);
    a.view_mut((n1, n1), (n2, n2)).copy_from(&bottom.a);
    let mut b = DMatrix::zeros(n, 1);
    b.view_mut((0, 0), (n1, 1)).copy_from(&top.b);
    b.view_mut((n1, 0), (n2, 1)).copy_from(&bottom.b);
    let mut c = DMatrix::zeros(2, n);
    c.view_mut((0, 0), (1, n1)).copy_from(&top.c);
    c.view_mut((1, n1), (1, n2)).copy_from(&bottom.c);
    let d = DMatrix::from_column_slice(2, 1, &[top.d[(0, 0)], bottom.d[(0, 0)]]);
    StateSpace::new(a, b, c, d).expect("fan-out dimensions agree")
}

fn realize(tf: &RationalTf) -> Result<StateSpace, LoopError> {
    Ok(StateSpace::from_tf(tf)?)
}

/// State-space realization of the whole open loop `L(s)` as a SISO system.
///
/// Non-minimal: the actuator and its acceleration path are realized
/// separately, which adds only stable, uncontrollable copies of the
/// actuator poles.
pub fn open_loop_state_space(m: &LoopModel) -> Result<StateSpace, LoopError> {
    let b = m.path().blocks();
    let act = fan_out(&realize(&b.actuator)?, &realize(&b.actuator_accel)?);
    let plant = m.plant();
    let sensed = StateSpace::new(
        plant.a.clone(),
        plant.b.clone(),
        plant.c.rows(1, 1).into_owned(),
        plant.d.rows(1, 1).into_owned(),
    )?;
    let filter = match &m.filter {
        LoopFilter::Unity => RationalTf::unity(),
        LoopFilter::Params(p) => p.to_tf(),
        LoopFilter::Tf(t) => t.clone(),
    };
    let mut l = series(&act, &sensed);
    for tf in [&b.gyro, &b.vf, &b.delay, &pd_tf(m.kp, m.kd)?, &filter, &b.dac_zoh] {
        l = series(&l, &realize(tf)?);
    }
    Ok(l)
}

/// Poles of the negative-feedback closed loop `L / (1 + L)`.
pub fn closed_loop_poles(m: &LoopModel) -> Result<Vec<Complex64>, LoopError> {
    let l = open_loop_state_space(m)?;
    let d = l.d[(0, 0)];
    if (1.0 + d).abs() < 1e-12 {
        return Err(LoopError::BadModel("1 + L(inf) = 0: closed loop is improper".into()));
    }
    let a_cl = &l.a - &l.b * &l.c * (1.0 / (1.0 + d));
    Ok(crate::lti::balanced(&a_cl).complex_eigenvalues().iter().copied().collect())
}
