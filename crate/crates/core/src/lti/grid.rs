use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::LtiError;

/// Strictly increasing, positive angular frequencies in rad/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    omegas: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(omegas: Vec<f64>) -> Result<Self, LtiError> {
        if omegas.is_empty() || omegas.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(LtiError::BadRange);
        }
        if omegas.windows(2).any(|p| p[1] <= p[0]) {
            return Err(LtiError::BadRange);
        }
        Ok(Self { omegas })
    }

    /// Log-spaced grid over `[2 pi f_min, 2 pi f_max]` with both endpoints.
    ///
    /// The point count is `ceil(decades * points_per_decade) + 1`, which is
    /// exactly `decades * ppd + 1` for whole decades.
    pub fn log(f_min_hz: f64, f_max_hz: f64, points_per_decade: usize) -> Result<Self, LtiError> {
        if !(f_min_hz > 0.0 && f_max_hz > f_min_hz && f_max_hz.is_finite())
            || points_per_decade < 10
        {
            return Err(LtiError::BadRange);
        }
        let (w0, w1) = (2.0 * PI * f_min_hz, 2.0 * PI * f_max_hz);
        let decades = (w1 / w0).log10();
        let intervals = ((decades * points_per_decade as f64) - 1e-9).ceil().max(1.0) as usize;
        let (l0, l1) = (w0.ln(), w1.ln());
        let mut omegas: Vec<f64> = (0..=intervals)
            .map(|k| (l0 + (l1 - l0) * k as f64 / intervals as f64).exp())
            .collect();
        omegas[0] = w0;
        omegas[intervals] = w1;
        Ok(Self { omegas })
    }

    /// Sorted union of two grids; points closer than 1e-12 relative are merged.
    pub fn merged(&self, other: &Self) -> Self {
        let mut all: Vec<f64> = self.omegas.iter().chain(&other.omegas).copied().collect();
        all.sort_by(f64::total_cmp);
        let mut omegas: Vec<f64> = Vec::with_capacity(all.len());
        for w in all {
            match omegas.last() {
                Some(&last) if (w - last) <= 1e-12 * last => {}
                _ => omegas.push(w),
            }
        }
        Self { omegas }
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.omegas[0]
    }

    pub fn last(&self) -> f64 {
        self.omegas[self.omegas.len() - 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_decades_at_100_ppd() {
        let g = FrequencyGrid::log(0.01, 100.0, 100).unwrap();
        assert_eq!(g.len(), 401);
        assert_eq!(g.first(), 2.0 * PI * 0.01);
        assert_eq!(g.last(), 2.0 * PI * 100.0);
    }

    #[test]
    fn one_decade_endpoints() {
        let g = FrequencyGrid::log(1.0, 10.0, 10).unwrap();
        assert_eq!(g.len(), 11);
        assert_eq!(g.first(), 2.0 * PI);
        assert_eq!(g.last(), 20.0 * PI);
    }

    #[test]
    fn bad_ranges() {
        assert!(matches!(FrequencyGrid::log(10.0, 1.0, 10), Err(LtiError::BadRange)));
        assert!(matches!(FrequencyGrid::log(0.0, 1.0, 10), Err(LtiError::BadRange)));
        assert!(matches!(FrequencyGrid::log(1.0, 10.0, 9), Err(LtiError::BadRange)));
        assert!(FrequencyGrid::new(vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn fractional_decades_cover_range() {
        let g = FrequencyGrid::log(0.01, 200.0, 200).unwrap();
        assert_eq!(g.len(), 862);
        assert!(g.omegas().windows(2).all(|p| p[1] > p[0]));
    }

    #[test]
    fn merge_dedups() {
        let a = FrequencyGrid::new(vec![1.0, 2.0, 3.0]).unwrap();
        let b = FrequencyGrid::new(vec![2.0, 2.5]).unwrap();
        assert_eq!(a.merged(&b).omegas(), &[1.0, 2.0, 2.5, 3.0]);
    }
}
