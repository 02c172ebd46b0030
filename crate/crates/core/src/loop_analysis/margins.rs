use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::sampling::{augmented_omegas, extension_omegas, illinois, refine, unwrap_phase, Refine, Sample};
use super::{serde_inf, LoopError, LoopModel, OpenLoop, PlantPath, PoleCensus};
use crate::lti::{to_db, wrap_degrees, FrequencyGrid};

/// Classical margins, bending peaks and closed-loop stability of one loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginReport {
    /// Smallest gain margin over all phase crossovers; `+inf` if none.
    #[serde(with = "serde_inf")]
    pub gm_db: f64,
    /// Smallest phase margin over all gain crossovers; `+inf` if none.
    #[serde(with = "serde_inf")]
    pub pm_deg: f64,
    /// rad/s
    pub gm_freq: Option<f64>,
    /// rad/s
    pub pm_freq: Option<f64>,
    /// `|L|` at the first bending frequency, dB.
    #[serde(with = "serde_inf::option")]
    pub peak1_db: Option<f64>,
    /// `|L|` at the second bending frequency, dB.
    #[serde(with = "serde_inf::option")]
    pub peak2_db: Option<f64>,
    /// Certified stable by the Nyquist count.
    pub stable_closed_loop: bool,
    /// Closed-loop right-half-plane poles; `None` when the count is not certified.
    pub closed_loop_unstable: Option<i64>,
}

/// Result of the Nyquist winding count of `1 + L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NyquistReport {
    /// Right-half-plane poles of `L`.
    pub open_loop_unstable: usize,
    /// Order of the pole of `L` at the origin.
    pub origin_poles: Option<u32>,
    /// Net change of `arg(1 + L)` from the lowest to the highest frequency, deg.
    pub phase_change_deg: f64,
    /// `Z = P + n0/2 - dphi/pi`; `None` if not certified.
    pub closed_loop_unstable: Option<i64>,
}

impl NyquistReport {
    pub fn is_stable(&self) -> bool {
        self.closed_loop_unstable == Some(0)
    }
}

/// One Bode table row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodePoint {
    pub omega_rad_s: f64,
    #[serde(rename = "mag_dB")]
    pub mag_db: f64,
    pub phase_deg: f64,
}

const ANALYSIS: Refine = Refine {
    max_step_deg: 30.0,
    max_db: 3.0,
    shift: 0.0,
    min_rel: 1e-9,
};

const NYQUIST: Refine = Refine {
    max_step_deg: 30.0,
    max_db: f64::INFINITY,
    shift: 1.0,
    min_rel: 1e-11,
};

/// Crossover search tolerance on `ln(omega)`.
const XTOL: f64 = 1e-10;

struct Crossings {
    gm_db: f64,
    gm_freq: Option<f64>,
    pm_deg: f64,
    pm_freq: Option<f64>,
}

fn check_steps(s: &[Sample]) -> Result<(), LoopError> {
    for p in s.windows(2) {
        // A turn beyond 90 degrees is a negative real part of b conj(a).
        if p[0].1.norm_sqr() > 0.0 && (p[1].1 * p[0].1.conj()).re < 0.0 {
            return Err(LoopError::GridTooCoarse { omega: p[0].0 });
        }
    }
    Ok(())
}

/// Scans a refined sample set (steps under 90 degrees) for gain and phase
/// crossovers and polishes each bracket.
fn crossings<F>(eval: &F, s: &[Sample]) -> Result<Crossings, LoopError>
where
    F: Fn(f64) -> Result<Complex64, LoopError>,
{
    let mut out = Crossings {
        gm_db: f64::INFINITY,
        gm_freq: None,
        pm_deg: f64::INFINITY,
        pm_freq: None,
    };

    let lnmag = |w: f64| -> Result<f64, LoopError> { Ok(0.5 * eval(w)?.norm_sqr().ln()) };
    for k in 0..s.len() - 1 {
        let (a, b) = (s[k], s[k + 1]);
        let (ma, mb) = (a.1.norm_sqr(), b.1.norm_sqr());

        // Gain crossover: |L| passes through 1.
        if (ma < 1.0) != (mb < 1.0) || ma == 1.0 {
            let (ga, gb) = (0.5 * ma.ln(), 0.5 * mb.ln());
            let x = illinois(|x| lnmag(x.exp()), a.0.ln(), ga, b.0.ln(), gb, XTOL)?;
            let w = x.exp();
            let l = eval(w)?;
            let pm = wrap_degrees(l.arg().to_degrees() + 180.0).abs();
            if pm < out.pm_deg {
                out.pm_deg = pm;
                out.pm_freq = Some(w);
            }
        }

        // Phase crossover: L crosses the negative real axis, so arg(-L)
        // changes sign on the right half of the -L plane.
        let (ua, ub) = (-a.1, -b.1);
        let sign_change = (ua.im < 0.0) != (ub.im < 0.0) || (ua.im == 0.0 && ua.re > 0.0);
        if sign_change && ua.re + ub.re > 0.0 {
            let (fa, fb) = (ua.arg().to_degrees(), ub.arg().to_degrees());
            let local = |x: f64| -> Result<f64, LoopError> { Ok((-eval(x.exp())?).arg().to_degrees()) };
            let x = illinois(local, a.0.ln(), fa, b.0.ln(), fb, XTOL)?;
            let w = x.exp();
            let gm = to_db(eval(w)?.norm()).abs();
            if gm < out.gm_db {
                out.gm_db = gm;
                out.gm_freq = Some(w);
            }
        }
    }
    Ok(out)
}

fn nyquist_count<F>(eval: &F, full: &[Sample], census: PoleCensus) -> Result<NyquistReport, LoopError>
where
    F: Fn(f64) -> Result<Complex64, LoopError>,
{
    let mut rep = NyquistReport {
        open_loop_unstable: census.unstable,
        origin_poles: None,
        phase_change_deg: f64::NAN,
        closed_loop_unstable: None,
    };
    if full.len() < 2 {
        return Ok(rep);
    }
    let (w0, l0) = full[0];
    let (w1, l1) = full[1];
    let slope = -(l1.norm() / l0.norm()).ln() / (w1 / w0).ln();
    let n0 = slope.round();
    if (slope - n0).abs() < 0.05 && n0 >= 0.0 {
        rep.origin_poles = Some(n0 as u32);
    }

    let s = refine(eval, full, &NYQUIST)?;
    let mut total = 0.0;
    let mut resolved = true;
    for p in s.windows(2) {
        let (a, b) = (p[0].1 + 1.0, p[1].1 + 1.0);
        if a.norm_sqr() < 1e-24 || b.norm_sqr() < 1e-24 {
            resolved = false;
            break;
        }
        let z = b * a.conj();
        if z.re < 0.0 {
            resolved = false;
        }
        total += z.arg();
    }
    rep.phase_change_deg = total.to_degrees();
    if !resolved || census.on_axis > 0 {
        return Ok(rep);
    }
    if let Some(n0) = rep.origin_poles {
        let z = census.unstable as f64 + 0.5 * n0 as f64 - total / std::f64::consts::PI;
        let zr = z.round();
        if (z - zr).abs() < 0.1 && zr >= 0.0 {
            rep.closed_loop_unstable = Some(zr as i64);
        }
    }
    Ok(rep)
}

/// Sampled loop on the analysis grid plus the Nyquist extensions.
struct LoopSamples {
    analysis: Vec<Sample>,
    low: Vec<Sample>,
    high: Vec<Sample>,
}

fn analyze<F>(
    eval: &F,
    base: &LoopSamples,
    census: PoleCensus,
) -> Result<(Crossings, NyquistReport), LoopError>
where
    F: Fn(f64) -> Result<Complex64, LoopError>,
{
    let refined = refine(eval, &base.analysis, &ANALYSIS)?;
    check_steps(&refined)?;
    let c = crossings(eval, &refined)?;
    let mut full = base.low.clone();
    full.extend_from_slice(&refined);
    full.extend_from_slice(&base.high);
    let ny = nyquist_count(eval, &full, census)?;
    Ok((c, ny))
}

fn report(c: Crossings, ny: &NyquistReport, peak1: Option<f64>, peak2: Option<f64>) -> MarginReport {
    MarginReport {
        gm_db: c.gm_db,
        pm_deg: c.pm_deg,
        gm_freq: c.gm_freq,
        pm_freq: c.pm_freq,
        peak1_db: peak1,
        peak2_db: peak2,
        stable_closed_loop: ny.is_stable(),
        closed_loop_unstable: ny.closed_loop_unstable,
    }
}

fn sample_all<L: OpenLoop + ?Sized>(l: &L, omegas: &[f64]) -> Result<Vec<Sample>, LoopError> {
    omegas.iter().map(|&w| Ok((w, l.response(w)?))).collect()
}

fn loop_samples<L: OpenLoop + ?Sized>(l: &L, grid: &FrequencyGrid) -> Result<LoopSamples, LoopError> {
    let omegas = augmented_omegas(grid.omegas(), &l.sharp_modes());
    let (low, high) = extension_omegas(grid.first(), grid.last());
    Ok(LoopSamples {
        analysis: sample_all(l, &omegas)?,
        low: sample_all(l, &low)?,
        high: sample_all(l, &high)?,
    })
}

/// Gain and phase margins (negative feedback), bending peaks and the Nyquist
/// stability certificate of `l` over `grid`.
///
/// The grid is augmented with points on every lightly damped plant pole and
/// refined wherever the phase moves more than 30 deg or the magnitude more
/// than 3 dB between samples. Crossovers are located by regula falsi to
/// 1e-10 in `ln(omega)`.
pub fn margins<L: OpenLoop + ?Sized>(l: &L, grid: &FrequencyGrid) -> Result<MarginReport, LoopError> {
    let base = loop_samples(l, grid)?;
    let eval = |w: f64| l.response(w);
    let (c, ny) = analyze(&eval, &base, l.census())?;
    let (b1, b2) = l.bending_frequencies();
    let peak = |w: Option<f64>| -> Result<Option<f64>, LoopError> {
        w.map(|w| bending_peak(l, w, 0.0)).transpose()
    };
    Ok(report(c, &ny, peak(b1)?, peak(b2)?))
}

/// Nyquist certificate alone.
pub fn nyquist<L: OpenLoop + ?Sized>(l: &L, grid: &FrequencyGrid) -> Result<NyquistReport, LoopError> {
    let base = loop_samples(l, grid)?;
    let eval = |w: f64| l.response(w);
    let refined = refine(&eval, &base.analysis, &ANALYSIS)?;
    let mut full = base.low;
    full.extend_from_slice(&refined);
    full.extend_from_slice(&base.high);
    nyquist_count(&eval, &full, l.census())
}

/// Magnitude and unwrapped phase over the grid span.
///
/// Every grid point is kept; points are added wherever the phase would
/// move more than 30 deg or the magnitude more than 3 dB between rows, so
/// resonances between grid points do not break the unwrap.
pub fn bode<L: OpenLoop + ?Sized>(l: &L, grid: &FrequencyGrid) -> Result<Vec<BodePoint>, LoopError> {
    let omegas = augmented_omegas(grid.omegas(), &l.sharp_modes());
    let eval = |w: f64| l.response(w);
    let refined = refine(&eval, &sample_all(l, &omegas)?, &ANALYSIS)?;
    check_steps(&refined)?;
    let phase = unwrap_phase(&refined);
    let (lo, hi) = (grid.first(), grid.last());
    Ok(refined
        .iter()
        .zip(phase)
        .filter(|(s, _)| s.0 >= lo && s.0 <= hi)
        .map(|(s, p)| BodePoint {
            omega_rad_s: s.0,
            mag_db: to_db(s.1.norm()),
            phase_deg: p,
        })
        .collect())
}

/// Loop magnitude near a bending frequency, dB.
///
/// `window = 0` is `|L(j omega_center)|` exactly. Otherwise the maximum over
/// `[omega (1 - w), omega (1 + w)]`, from a 201-point log scan refined by
/// golden-section search to 1e-6 relative.
pub fn bending_peak<L: OpenLoop + ?Sized>(l: &L, omega_center: f64, window: f64) -> Result<f64, LoopError> {
    if !(omega_center > 0.0 && window >= 0.0) {
        return Err(LoopError::BadModel("bending peak needs omega > 0 and window >= 0".into()));
    }
    let center = to_db(l.response(omega_center)?.norm());
    if window == 0.0 {
        return Ok(center);
    }
    let lo = (omega_center * (1.0 - window).max(1e-6)).ln();
    let hi = (omega_center * (1.0 + window)).ln();
    let mag = |x: f64| -> Result<f64, LoopError> { Ok(l.response(x.exp())?.norm()) };
    let n = 201;
    let xs: Vec<f64> = (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect();
    let mut best = (0usize, -1.0);
    for (k, &x) in xs.iter().enumerate() {
        let m = mag(x)?;
        if m > best.1 {
            best = (k, m);
        }
    }
    let (mut a, mut b) = (xs[best.0.saturating_sub(1)], xs[(best.0 + 1).min(n - 1)]);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (mag(c)?, mag(d)?);
    let mut top = best.1.max(fc).max(fd);
    while b - a > 1e-6 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = mag(c)?;
            top = top.max(fc);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = mag(d)?;
            top = top.max(fd);
        }
    }
    Ok(to_db(top).max(center))
}

/// Plant-path samples on a fixed analysis grid, reused across controller
/// candidates.
///
/// The grid is pre-refined on the plant path, so the sample set can differ
/// from the one [`margins`] builds for the full loop. Crossover locations
/// then agree to the root-finding tolerance rather than bit for bit.
#[derive(Debug, Clone)]
pub struct AnalysisCache {
    analysis: Vec<Sample>,
    low: Vec<Sample>,
    high: Vec<Sample>,
    b1: Option<Sample>,
    b2: Option<Sample>,
    census: PoleCensus,
}

impl AnalysisCache {
    pub fn new(
        path: &PlantPath,
        grid: &FrequencyGrid,
        omega_b1: Option<f64>,
        omega_b2: Option<f64>,
    ) -> Result<Self, LoopError> {
        let omegas = augmented_omegas(grid.omegas(), path.sharp_modes());
        let (low, high) = extension_omegas(grid.first(), grid.last());
        let fixed = |ws: &[f64]| -> Result<Vec<Sample>, LoopError> {
            ws.iter().map(|&w| Ok((w, path.response(w)?))).collect()
        };
        let one = |w: Option<f64>| -> Result<Option<Sample>, LoopError> {
            w.map(|w| Ok((w, path.response(w)?))).transpose()
        };
        // Resolve the plant's own resonances once; a smooth controller then
        // rarely needs further points.
        let eval = |w: f64| path.response(w);
        let analysis = refine(&eval, &fixed(&omegas)?, &ANALYSIS)?;
        Ok(Self {
            analysis,
            low: fixed(&low)?,
            high: fixed(&high)?,
            b1: one(omega_b1)?,
            b2: one(omega_b2)?,
            census: path.census(),
        })
    }

    fn combine(m: &LoopModel, s: &[Sample]) -> Result<Vec<Sample>, LoopError> {
        s.iter().map(|&(w, f)| Ok((w, m.combine(w, f)?))).collect()
    }

    /// `|L|` in dB at the cached first (`which = 1`) or second bending frequency.
    pub fn peak(&self, m: &LoopModel, which: u8) -> Result<Option<f64>, LoopError> {
        let s = if which == 1 { self.b1 } else { self.b2 };
        s.map(|(w, f)| Ok(to_db(m.combine(w, f)?.norm()))).transpose()
    }

    pub fn margins(&self, m: &LoopModel) -> Result<MarginReport, LoopError> {
        let base = LoopSamples {
            analysis: Self::combine(m, &self.analysis)?,
            low: Self::combine(m, &self.low)?,
            high: Self::combine(m, &self.high)?,
        };
        let eval = |w: f64| m.response(w);
        let (c, ny) = analyze(&eval, &base, self.census)?;
        Ok(report(c, &ny, self.peak(m, 1)?, self.peak(m, 2)?))
    }
}
