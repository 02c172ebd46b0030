use std::sync::Arc;

use num_complex::Complex64;

use super::LoopError;
use crate::avionics::AvionicsBlocks;
use crate::control::{ControlError, FilterParams};
use crate::lti::{HessenbergResponse, ModalRow, RationalTf, StateSpace};
use crate::vehicle::{assemble_plant, FlightNode, PlantOptions};

/// Bending filter inside the loop.
#[derive(Debug, Clone, PartialEq)]
pub enum LoopFilter {
    Unity,
    /// Factored parametric filter.
    Params(FilterParams),
    /// Arbitrary rational filter.
    Tf(RationalTf),
}

impl LoopFilter {
    pub fn response(&self, omega: f64) -> Result<Complex64, LoopError> {
        match self {
            LoopFilter::Unity => Ok(Complex64::new(1.0, 0.0)),
            LoopFilter::Params(p) => Ok(p.freq_response(omega)),
            LoopFilter::Tf(t) => Ok(t.freq_response(omega)?),
        }
    }
}

/// `PD(jw) = (k_D jw + k_p) / jw`.
pub fn pd_response(kp: f64, kd: f64, omega: f64) -> Complex64 {
    Complex64::new(kd, -kp / omega)
}

/// Plant poles relevant to a Nyquist count.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PoleCensus {
    /// Poles in the open right half-plane.
    pub unstable: usize,
    /// Nonzero poles on the imaginary axis.
    pub on_axis: usize,
}

/// A lightly damped pole pair: damped frequency and decay rate, rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SharpMode {
    pub omega: f64,
    pub sigma: f64,
}

/// Count poles and collect lightly damped pairs from a pole list.
pub fn classify_poles(poles: &[Complex64]) -> (PoleCensus, Vec<SharpMode>) {
    let mut census = PoleCensus::default();
    let mut sharp = Vec::new();
    for p in poles {
        let mag = p.norm();
        if mag <= 1e-9 {
            continue;
        }
        if p.re.abs() <= 1e-10 * mag.max(1.0) {
            census.on_axis += 1;
        } else if p.re > 0.0 {
            census.unstable += 1;
        }
        if p.im > 0.0 && p.re.abs() < 0.2 * mag {
            sharp.push(SharpMode {
                omega: p.im,
                sigma: p.re.abs(),
            });
        }
    }
    sharp.sort_by(|a, b| a.omega.total_cmp(&b.omega));
    (census, sharp)
}

/// The controller-independent part of the loop: avionics and plant from the
/// controller output to the sensed rate,
/// `H_DZ [ACT P_(delta->qm) + ACT_acc P_(delta''->qm)] GYRO H_VF H_D`.
#[derive(Debug, Clone)]
pub struct PlantPath {
    plant: StateSpace,
    blocks: AvionicsBlocks,
    fast: HessenbergResponse,
    /// Pole-residue form of the `q_m` row, when it reproduces `fast`.
    modal: Option<ModalRow>,
    census: PoleCensus,
    sharp: Vec<SharpMode>,
}

impl PlantPath {
    pub fn new(plant: StateSpace, blocks: AvionicsBlocks) -> Result<Self, LoopError> {
        if plant.inputs() != 2 || plant.outputs() != 2 {
            return Err(LoopError::BadModel(format!(
                "plant must have 2 inputs and 2 outputs (got {} and {})",
                plant.inputs(),
                plant.outputs()
            )));
        }
        let fast = HessenbergResponse::new(&plant);
        let poles = plant.eigenvalues();
        let (census, sharp) = classify_poles(&poles);
        let modal = ModalRow::new(&plant, 1, &poles, &fast);
        Ok(Self {
            plant,
            blocks,
            fast,
            modal,
            census,
            sharp,
        })
    }

    pub fn plant(&self) -> &StateSpace {
        &self.plant
    }

    pub fn blocks(&self) -> &AvionicsBlocks {
        &self.blocks
    }

    pub fn census(&self) -> PoleCensus {
        self.census
    }

    pub fn sharp_modes(&self) -> &[SharpMode] {
        &self.sharp
    }

    pub fn response(&self, omega: f64) -> Result<Complex64, LoopError> {
        let b = &self.blocks;
        let mut p = [Complex64::new(0.0, 0.0); 2];
        match &self.modal {
            Some(m) => m.row_into(omega, &mut p),
            None => p[0] = Complex64::new(f64::NAN, 0.0),
        }
        // On an axis pole the Hessenberg solve reports the singularity.
        if !p.iter().all(|v| v.is_finite()) {
            p.copy_from_slice(&self.fast.row(1, omega)?);
        }
        let act = b.actuator.freq_response(omega)?;
        let acc = b.actuator_accel.freq_response(omega)?;
        let inner = act * p[0] + acc * p[1];
        Ok(b.dac_zoh.freq_response(omega)?
            * inner
            * b.gyro.freq_response(omega)?
            * b.vf.freq_response(omega)?
            * b.delay.freq_response(omega)?)
    }
}

/// Pitch loop at one frozen flight node, broken at the controller input.
///
/// `L = PD F H_DZ [ACT P_(delta->qm) + ACT_acc P_(delta''->qm)] GYRO H_VF H_D`.
/// The negative feedback sign is applied by the margin and Nyquist code.
/// Cutting the single loop anywhere else gives the same scalar `L`.
#[derive(Debug, Clone)]
pub struct LoopModel {
    path: Arc<PlantPath>,
    pub kp: f64,
    pub kd: f64,
    pub filter: LoopFilter,
    /// First and second bending frequencies, rad/s.
    pub omega_b1: Option<f64>,
    pub omega_b2: Option<f64>,
}

fn check_gains(kp: f64, kd: f64) -> Result<(), LoopError> {
    if !(kp >= 0.0 && kd >= 0.0 && kp.is_finite() && kd.is_finite()) {
        return Err(ControlError::NonPositive("PD gains").into());
    }
    if kp == 0.0 && kd == 0.0 {
        return Err(ControlError::BothGainsZero.into());
    }
    Ok(())
}

impl LoopModel {
    pub fn new(
        plant: StateSpace,
        blocks: AvionicsBlocks,
        kp: f64,
        kd: f64,
        filter: LoopFilter,
    ) -> Result<Self, LoopError> {
        Self::from_path(Arc::new(PlantPath::new(plant, blocks)?), kp, kd, filter)
    }

    pub fn from_path(path: Arc<PlantPath>, kp: f64, kd: f64, filter: LoopFilter) -> Result<Self, LoopError> {
        check_gains(kp, kd)?;
        Ok(Self {
            path,
            kp,
            kd,
            filter,
            omega_b1: None,
            omega_b2: None,
        })
    }

    /// Assemble the plant of `node` and close the cascade around it.
    pub fn for_node(
        node: &FlightNode,
        blocks: &AvionicsBlocks,
        kp: f64,
        kd: f64,
        filter: LoopFilter,
        opts: PlantOptions,
    ) -> Result<Self, LoopError> {
        let plant = assemble_plant(node, opts)?;
        let mut m = Self::new(plant, blocks.clone(), kp, kd, filter)?;
        m.omega_b1 = node.bending.first().map(|b| b.omega);
        m.omega_b2 = node.omega_b2();
        Ok(m)
    }

    /// Same plant path with a different controller.
    pub fn with_controller(&self, kp: f64, kd: f64, filter: LoopFilter) -> Result<Self, LoopError> {
        check_gains(kp, kd)?;
        Ok(Self {
            path: Arc::clone(&self.path),
            kp,
            kd,
            filter,
            omega_b1: self.omega_b1,
            omega_b2: self.omega_b2,
        })
    }

    pub fn path(&self) -> &Arc<PlantPath> {
        &self.path
    }

    pub fn plant(&self) -> &StateSpace {
        self.path.plant()
    }

    /// `PD(jw) F(jw)`.
    pub fn controller_response(&self, omega: f64) -> Result<Complex64, LoopError> {
        Ok(pd_response(self.kp, self.kd, omega) * self.filter.response(omega)?)
    }

    /// Combine a controller value with a plant-path value computed elsewhere.
    pub(crate) fn combine(&self, omega: f64, fixed: Complex64) -> Result<Complex64, LoopError> {
        Ok(self.controller_response(omega)? * fixed)
    }
}

/// Anything with a scalar open-loop frequency response and known poles.
pub trait OpenLoop {
    fn response(&self, omega: f64) -> Result<Complex64, LoopError>;

    /// Right-half-plane and imaginary-axis poles of `L`, origin excluded.
    fn census(&self) -> PoleCensus;

    /// Lightly damped poles that need extra grid points.
    fn sharp_modes(&self) -> Vec<SharpMode>;

    /// First and second bending frequencies, rad/s, when the loop has them.
    fn bending_frequencies(&self) -> (Option<f64>, Option<f64>) {
        (None, None)
    }
}

impl OpenLoop for LoopModel {
    fn response(&self, omega: f64) -> Result<Complex64, LoopError> {
        let fixed = self.path.response(omega)?;
        self.combine(omega, fixed)
    }

    fn census(&self) -> PoleCensus {
        self.path.census()
    }

    fn sharp_modes(&self) -> Vec<SharpMode> {
        self.path.sharp_modes().to_vec()
    }

    fn bending_frequencies(&self) -> (Option<f64>, Option<f64>) {
        (self.omega_b1, self.omega_b2)
    }
}

impl OpenLoop for RationalTf {
    fn response(&self, omega: f64) -> Result<Complex64, LoopError> {
        Ok(self.freq_response(omega)?)
    }

    fn census(&self) -> PoleCensus {
        classify_poles(&self.den().roots()).0
    }

    fn sharp_modes(&self) -> Vec<SharpMode> {
        classify_poles(&self.den().roots()).1
    }
}

/// `L(jw)` of a loop model.
pub fn open_loop_response(m: &LoopModel, omega: f64) -> Result<Complex64, LoopError> {
    if !(omega > 0.0) {
        return Err(LoopError::BadModel(format!("omega must be positive (got {omega})")));
    }
    m.response(omega)
}
