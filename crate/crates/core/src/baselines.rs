//! Classical comparison patterns: the N-slit grating and the Fabry-Perot etalon.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::correlation::CorrelationTrace;
use crate::error::{Error, Result};
use crate::grid::ScanGrid;

/// N-slit interference, `sinc²β · (sin Nφ / sin φ)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NSlitModel {
    pub slit_count: usize,
    /// Single-slit diffraction parameter; 0 means point slits.
    pub beta: f64,
}

impl NSlitModel {
    pub fn new(slit_count: usize, beta: f64) -> Result<Self> {
        if slit_count == 0 {
            return Err(Error::InvalidConfig("slit count must be at least 1".into()));
        }
        if !beta.is_finite() {
            return Err(Error::NonFinite("slit beta"));
        }
        Ok(Self { slit_count, beta })
    }

    pub fn point_slits(slit_count: usize) -> Result<Self> {
        Self::new(slit_count, 0.0)
    }

    pub fn envelope(&self) -> f64 {
        let s = sinc(self.beta);
        s * s
    }

    /// `sin(Nφ)/sin(φ)`, with the removable singularity at `φ = mπ` taken as
    /// its limit. Evaluated on `r = φ − mπ` so that the ratio stays accurate
    /// near every principal maximum.
    fn dirichlet(&self, phi: f64) -> f64 {
        let n = self.slit_count as f64;
        let m = (phi / PI).round();
        let r = phi - m * PI;
        if r == 0.0 {
            n
        } else {
            (n * r).sin() / r.sin()
        }
    }

    pub fn value(&self, phi: f64) -> f64 {
        let d = self.dirichlet(phi);
        self.envelope() * d * d
    }

    /// Grating factor scaled so principal maxima equal 1.
    pub fn normalized_value(&self, phi: f64) -> f64 {
        let d = self.dirichlet(phi) / self.slit_count as f64;
        d * d
    }

    pub fn peak_value(&self) -> f64 {
        let n = self.slit_count as f64;
        self.envelope() * n * n
    }
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

pub fn nslit_trace(model: &NSlitModel, grid: &ScanGrid) -> Result<CorrelationTrace> {
    let values: Vec<f64> = grid.points().map(|phi| model.value(phi)).collect();
    CorrelationTrace::from_values(*grid, &values, 1, Some(model.peak_value()))
}

/// Etalon transmission `1 / (1 + F sin²(φ/2))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FabryPerotModel {
    pub reflectance: f64,
}

impl FabryPerotModel {
    pub fn new(reflectance: f64) -> Result<Self> {
        if !(reflectance > 0.0 && reflectance < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "reflectance must lie in (0, 1), got {reflectance}"
            )));
        }
        Ok(Self { reflectance })
    }

    /// `F = 4R/(1 − R)²`.
    pub fn coefficient_of_finesse(&self) -> f64 {
        let r = self.reflectance;
        4.0 * r / ((1.0 - r) * (1.0 - r))
    }

    /// `π√R/(1 − R)`, the high-reflectance approximation of spacing/FWHM.
    pub fn finesse(&self) -> f64 {
        let r = self.reflectance;
        PI * r.sqrt() / (1.0 - r)
    }

    /// Exact full width at half maximum of one transmission peak, in phase.
    pub fn fwhm(&self) -> f64 {
        4.0 * (1.0 / self.coefficient_of_finesse().sqrt()).asin()
    }

    pub fn value(&self, phi: f64) -> f64 {
        let s = (0.5 * phi).sin();
        1.0 / (1.0 + self.coefficient_of_finesse() * s * s)
    }
}

pub fn fabry_perot_trace(model: &FabryPerotModel, grid: &ScanGrid) -> Result<CorrelationTrace> {
    let values: Vec<f64> = grid.points().map(|phi| model.value(phi)).collect();
    CorrelationTrace::from_values(*grid, &values, 1, Some(1.0))
}

/// Full width at half maximum of the highest peak of a trace (the one nearest
/// the grid centre when the maximum repeats), measured from
/// linearly interpolated half-level crossings.
pub fn measure_fwhm(trace: &CorrelationTrace) -> Result<f64> {
    let v = &trace.normalized_values;
    if v.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: v.len(),
        });
    }
    let top = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // periodic patterns repeat their maximum; take the copy nearest the centre
    let centre = 0.5 * (v.len() - 1) as f64;
    let peak = (0..v.len())
        .filter(|&k| v[k] >= top * (1.0 - 1e-12))
        .min_by(|&a, &b| (a as f64 - centre).abs().total_cmp(&(b as f64 - centre).abs()))
        .expect("non-empty");
    let half = 0.5 * top;
    let step = trace.grid.step();

    let mut i = peak;
    while i > 0 && v[i - 1] > half {
        i -= 1;
    }
    if i == 0 {
        return Err(Error::InsufficientScan(
            "left half-maximum crossing outside grid".into(),
        ));
    }
    let left = trace.grid.point(i - 1) + step * (half - v[i - 1]) / (v[i] - v[i - 1]);

    let mut i = peak;
    while i + 1 < v.len() && v[i + 1] > half {
        i += 1;
    }
    if i + 1 == v.len() {
        return Err(Error::InsufficientScan(
            "right half-maximum crossing outside grid".into(),
        ));
    }
    let right = trace.grid.point(i) + step * (v[i] - half) / (v[i] - v[i + 1]);
    Ok(right - left)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn nslit_values() {
        let two = NSlitModel::point_slits(2).unwrap();
        assert_eq!(two.value(0.0), 4.0);
        assert_abs_diff_eq!(two.value(FRAC_PI_2), 0.0, epsilon = 1e-30);
        // two slits reduce to |2 cos φ|²
        for k in 0..20 {
            let phi = 0.3 * k as f64 - 2.0;
            assert_abs_diff_eq!(two.value(phi), 4.0 * phi.cos().powi(2), epsilon = 1e-12);
        }
        let ten = NSlitModel::point_slits(10).unwrap();
        for m in -3..=3 {
            let phi = m as f64 * PI;
            assert_relative_eq!(ten.value(phi), 100.0, max_relative = 1e-12);
            assert_relative_eq!(ten.normalized_value(phi), 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn nslit_continuous_at_singularities() {
        for n in [2usize, 5, 10, 100] {
            let model = NSlitModel::point_slits(n).unwrap();
            let n2 = (n * n) as f64;
            for m in -4..=4 {
                for eps in [1e-9, -1e-9] {
                    let v = model.value(m as f64 * PI + eps);
                    assert!((v - n2).abs() / n2 < 1e-3, "N={n} m={m}: {v}");
                }
            }
        }
    }

    #[test]
    fn nslit_envelope() {
        let model = NSlitModel::new(3, FRAC_PI_2).unwrap();
        let s = 1.0 / FRAC_PI_2;
        assert_relative_eq!(model.value(0.0), 9.0 * s * s, max_relative = 1e-14);
        assert!(NSlitModel::new(0, 0.0).is_err());
        assert!(NSlitModel::new(2, f64::NAN).is_err());
    }

    #[test]
    fn nslit_peaks_fixed_at_zero() {
        for n in [2usize, 3, 10, 50] {
            let g = ScanGrid::new(-FRAC_PI_2, FRAC_PI_2, 20 * n + 1).unwrap();
            let t = nslit_trace(&NSlitModel::point_slits(n).unwrap(), &g).unwrap();
            let best = t
                .normalized_values
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .unwrap()
                .0;
            assert!(g.point(best).abs() < 1e-12, "N={n}");
        }
    }

    #[test]
    fn fabry_perot_basics() {
        let fp = FabryPerotModel::new(0.9).unwrap();
        assert_eq!(fp.value(0.0), 1.0);
        assert_relative_eq!(fp.coefficient_of_finesse(), 360.0, max_relative = 1e-12);
        assert_abs_diff_eq!(fp.finesse(), 29.80, epsilon = 5e-3);
        assert!(FabryPerotModel::new(0.0).is_err());
        assert!(FabryPerotModel::new(1.0).is_err());
    }

    #[test]
    fn finesse_matches_measured_spacing_over_width() {
        for r in [0.9, 0.99] {
            let fp = FabryPerotModel::new(r).unwrap();
            let g = ScanGrid::new(-PI, PI, 2_000_001).unwrap();
            let fwhm = measure_fwhm(&fabry_perot_trace(&fp, &g).unwrap()).unwrap();
            let product = fwhm * fp.finesse();
            assert!((product - 2.0 * PI).abs() / (2.0 * PI) < 0.01, "R={r}: {product}");
        }
    }

    #[test]
    fn fwhm_on_periodic_scan_uses_interior_peak() {
        let fp = FabryPerotModel::new(0.9).unwrap();
        let g = ScanGrid::new(-2.0 * PI, 2.0 * PI, 80_001).unwrap();
        let fwhm = measure_fwhm(&fabry_perot_trace(&fp, &g).unwrap()).unwrap();
        assert!((fwhm - fp.fwhm()).abs() < g.step(), "{fwhm}");
    }

    #[test]
    fn low_reflectance_width_uses_exact_form() {
        // at R = 0.5 the π√R/(1−R) approximation is ~2 % off; the exact width is not
        let fp = FabryPerotModel::new(0.5).unwrap();
        let g = ScanGrid::new(-PI, PI, 2_000_001).unwrap();
        let fwhm = measure_fwhm(&fabry_perot_trace(&fp, &g).unwrap()).unwrap();
        assert_relative_eq!(fwhm, fp.fwhm(), max_relative = 1e-6);
        let approx_err = (fwhm * fp.finesse() - 2.0 * PI).abs() / (2.0 * PI);
        assert!(approx_err > 0.01 && approx_err < 0.03);
    }
}
