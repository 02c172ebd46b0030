use num_complex::Complex64;

use super::{LoopError, SharpMode};

pub(crate) type Sample = (f64, Complex64);

/// Offsets, in units of a mode's decay rate, added around each sharp pole.
const SHARP_OFFSETS: [f64; 15] = [
    -32.0, -16.0, -8.0, -4.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0,
];

/// Base grid plus points clustered on every lightly damped pole inside the span.
pub(crate) fn augmented_omegas(base: &[f64], sharp: &[SharpMode]) -> Vec<f64> {
    let (lo, hi) = (base[0], base[base.len() - 1]);
    let mut all = base.to_vec();
    for m in sharp {
        for k in SHARP_OFFSETS {
            let w = m.omega + k * m.sigma;
            if w > lo && w < hi {
                all.push(w);
            }
        }
    }
    all.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(all.len());
    for w in all {
        match out.last() {
            Some(&last) if w - last <= 1e-12 * last => {}
            _ => out.push(w),
        }
    }
    out
}

/// Low and high extensions for the Nyquist count, 20 points per decade
/// down to 1e-6 rad/s and up to 1e6 rad/s.
pub(crate) fn extension_omegas(first: f64, last: f64) -> (Vec<f64>, Vec<f64>) {
    const LO: f64 = 1e-6;
    const HI: f64 = 1e6;
    const PPD: f64 = 20.0;
    let mut low = Vec::new();
    if first > LO * 1.000_001 {
        let n = ((first / LO).log10() * PPD).ceil() as usize;
        for k in 0..n {
            low.push(LO * 10f64.powf(k as f64 / PPD));
        }
        while low.last().is_some_and(|w| *w >= first / 1.000_001) {
            low.pop();
        }
    }
    let mut high = Vec::new();
    if last < HI / 1.000_001 {
        let n = ((HI / last).log10() * PPD).ceil() as usize;
        for k in (0..n).rev() {
            high.push(HI / 10f64.powf(k as f64 / PPD));
        }
        high.retain(|w| *w > last * 1.000_001);
    }
    (low, high)
}

/// Criteria for inserting midpoints between adjacent samples.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Refine {
    /// Largest allowed step of `arg(shift + L)`, degrees.
    pub max_step_deg: f64,
    /// Largest allowed step of `|L|`, dB; infinite disables the check.
    pub max_db: f64,
    /// Evaluate the argument of `shift + L`.
    pub shift: f64,
    /// Stop splitting below this relative interval width.
    pub min_rel: f64,
}

const MAX_INSERTED: usize = 200_000;

/// True when the angle from `a` to `b` exceeds `limit_deg` (below 90).
/// Compares `b conj(a)` against the limit's tangent instead of taking atan2.
pub(crate) fn turn_exceeds(a: Complex64, b: Complex64, tan_limit: f64) -> bool {
    let z = b * a.conj();
    z.re <= 0.0 || z.im.abs() > tan_limit * z.re
}

fn needs_split(r: &Refine, tan_limit: f64, db_ratio: f64, a: &Sample, b: &Sample) -> bool {
    if b.0 / a.0 - 1.0 <= r.min_rel {
        return false;
    }
    let (fa, fb) = (a.1 + r.shift, b.1 + r.shift);
    if fa.norm_sqr() == 0.0 || fb.norm_sqr() == 0.0 {
        return false;
    }
    if turn_exceeds(fa, fb, tan_limit) {
        return true;
    }
    // |20 log10(|b| / |a|)| > max_db without the logarithm.
    let (ma, mb) = (a.1.norm_sqr(), b.1.norm_sqr());
    r.max_db.is_finite() && (mb > db_ratio * ma || ma > db_ratio * mb)
}

/// Insert geometric midpoints until every step meets `r`.
pub(crate) fn refine<F>(eval: &F, samples: &[Sample], r: &Refine) -> Result<Vec<Sample>, LoopError>
where
    F: Fn(f64) -> Result<Complex64, LoopError>,
{
    let mut out: Vec<Sample> = Vec::with_capacity(samples.len() + samples.len() / 4);
    let mut inserted = 0usize;
    let mut stack: Vec<Sample> = Vec::new();
    let tan_limit = r.max_step_deg.to_radians().tan();
    let db_ratio = 10f64.powf(r.max_db / 10.0);
    for s in samples {
        let Some(_) = out.last() else {
            out.push(*s);
            continue;
        };
        stack.push(*s);
        while let Some(top) = stack.last().copied() {
            let cur = *out.last().expect("nonempty");
            if needs_split(r, tan_limit, db_ratio, &cur, &top) {
                let mid = (cur.0 * top.0).sqrt();
                inserted += 1;
                if inserted > MAX_INSERTED {
                    return Err(LoopError::GridTooCoarse { omega: cur.0 });
                }
                stack.push((mid, eval(mid)?));
            } else {
                out.push(top);
                stack.pop();
            }
        }
    }
    Ok(out)
}

/// Unwrapped phase in degrees, starting from the principal value.
pub(crate) fn unwrap_phase(samples: &[Sample]) -> Vec<f64> {
    let mut out = Vec::with_capacity(samples.len());
    let mut acc = 0.0;
    for (k, s) in samples.iter().enumerate() {
        if k == 0 {
            acc = s.1.arg().to_degrees();
        } else {
            acc += (s.1 / samples[k - 1].1).arg().to_degrees();
        }
        out.push(acc);
    }
    out
}

/// Illinois-modified regula falsi on a sign-changing bracket.
///
/// Returns the final abscissa; stops when the bracket is narrower than `xtol`
/// or the function value is exactly zero.
pub(crate) fn illinois<F>(f: F, mut a: f64, mut fa: f64, mut b: f64, mut fb: f64, xtol: f64) -> Result<f64, LoopError>
where
    F: Fn(f64) -> Result<f64, LoopError>,
{
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    for _ in 0..200 {
        if (b - a).abs() <= xtol {
            break;
        }
        let mut c = b - fb * (b - a) / (fb - fa);
        if !(c > a.min(b) && c < a.max(b)) {
            c = 0.5 * (a + b);
        }
        let fc = f(c)?;
        if fc == 0.0 {
            return Ok(c);
        }
        let step = (c - b).abs();
        if (fc > 0.0) == (fb > 0.0) {
            fa *= 0.5;
        } else {
            a = b;
            fa = fb;
        }
        b = c;
        fb = fc;
        if step < 0.01 * xtol {
            break;
        }
    }
    Ok(if fa.abs() < fb.abs() { a } else { b })
}
