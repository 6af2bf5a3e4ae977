//! Synchronized SLM pixel pairs, the 45° polarizer, and the photodiode arrays.
//!
//! Pixel `j` retards the V component by `ξ_j = πj/N` on both MZI outputs. Each
//! pixel receives `1/N` of the expanded beam. The polarizer keeps half of the
//! events on average, and detected intensities are referred to that passed
//! ensemble, so that `I_A^j + I_B^j = I0/N`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, PI};

use crate::error::{Error, Result};
use crate::optics::{intensity, mzi_outputs, project_polarizer, ApparatusConfig, JonesVector};

/// Fraction of events transmitted by the 45° polarizer.
pub const POLARIZER_PASS_FRACTION: f64 = 0.5;

/// Projection angle of the common polarizer P.
pub const POLARIZER_ANGLE: f64 = FRAC_PI_4;

#[derive(Debug, Clone, PartialEq)]
pub struct SlmArray {
    phases: Vec<f64>,
}

impl SlmArray {
    pub fn from_phases(phases: Vec<f64>) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::ZeroPixels);
        }
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("SLM phases"));
        }
        Ok(Self { phases })
    }

    pub fn pixel_count(&self) -> usize {
        self.phases.len()
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }
}

/// `ξ_j = πj/N` for `j = 0..N`.
pub fn make_slm(n: usize) -> Result<SlmArray> {
    if n == 0 {
        return Err(Error::ZeroPixels);
    }
    let phases = (0..n).map(|j| PI * j as f64 / n as f64).collect();
    Ok(SlmArray { phases })
}

/// Phase delay `ξ` on the vertical (slow-axis) component: `v → v·e^{−iξ}`.
pub fn slm_apply(field: JonesVector, xi: f64) -> JonesVector {
    JonesVector {
        h: field.h,
        v: field.v * Complex64::from_polar(1.0, -xi),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EraserRecord {
    pub index: usize,
    pub xi: f64,
    /// `ψ_j = φ − ξ_j`.
    pub psi: f64,
    pub intensity_a: f64,
    pub intensity_b: f64,
}

impl EraserRecord {
    /// Closed-form record: `I_A = (I0/2N)(1 − cos ψ)`, `I_B = (I0/2N)(1 + cos ψ)`,
    /// evaluated as `(I0/N) sin²(ψ/2)` and `(I0/N) cos²(ψ/2)` so nulls are exact
    /// and small intensities keep full relative precision.
    pub fn closed_form(config: &ApparatusConfig, index: usize, xi: f64) -> Self {
        let psi = config.mzi_phase - xi;
        let scale = config.reference_intensity() / config.pixel_count as f64;
        let (s, c) = (0.5 * psi).sin_cos();
        Self {
            index,
            xi,
            psi,
            intensity_a: scale * s * s,
            intensity_b: scale * c * c,
        }
    }
}

fn check_pixel_count(config: &ApparatusConfig, slm: &SlmArray) -> Result<()> {
    config.validate()?;
    if config.pixel_count != slm.pixel_count() {
        return Err(Error::PixelCountMismatch {
            config: config.pixel_count,
            slm: slm.pixel_count(),
        });
    }
    Ok(())
}

/// Detector intensities `(I_A^j, I_B^j)` obtained by propagating the fields
/// element by element: MZI outputs, SLM pixel, polarizer, photodiode.
pub fn propagate_erasers(config: &ApparatusConfig, slm: &SlmArray) -> Result<Vec<(f64, f64)>> {
    check_pixel_count(config, slm)?;
    let (out_a, out_b) = mzi_outputs(config)?;
    let detector_scale = 1.0 / (config.pixel_count as f64 * POLARIZER_PASS_FRACTION);
    Ok(slm
        .phases()
        .iter()
        .map(|&xi| {
            let detect = |field| detector_scale * intensity(project_polarizer(slm_apply(field, xi), POLARIZER_ANGLE));
            (detect(out_a), detect(out_b))
        })
        .collect())
}

/// Eraser records for every pixel.
///
/// The propagated intensities must agree with the closed form to 1e-12 of the
/// per-pixel power `I0/N`; the closed-form values are reported, which keeps
/// physical nulls exactly zero (the propagated ones carry rounding at the ulp
/// level of the wave-plate and polarizer matrix elements).
pub fn measure_erasers(config: &ApparatusConfig, slm: &SlmArray) -> Result<Vec<EraserRecord>> {
    let propagated = propagate_erasers(config, slm)?;
    let tolerance = 1e-12 * config.reference_intensity() / config.pixel_count as f64;
    slm.phases()
        .iter()
        .zip(propagated)
        .enumerate()
        .map(|(j, (&xi, (ia, ib)))| {
            let record = EraserRecord::closed_form(config, j, xi);
            let deviation = (ia - record.intensity_a).abs().max((ib - record.intensity_b).abs());
            if deviation > tolerance {
                return Err(Error::PipelineMismatch { pixel: j, deviation });
            }
            Ok(record)
        })
        .collect()
}

/// Photon counts for one detected pixel pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountSample {
    pub counts_a: u64,
    pub counts_b: u64,
    pub exposure: f64,
    pub seed: u64,
}

/// Seeded Poisson photon-count source.
#[derive(Debug, Clone)]
pub struct ShotNoise {
    rng: ChaCha8Rng,
}

impl ShotNoise {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// One Poisson draw with mean `mean_intensity × exposure`.
    pub fn sample(&mut self, mean_intensity: f64, exposure: f64) -> Result<u64> {
        if !mean_intensity.is_finite() || !exposure.is_finite() {
            return Err(Error::NonFinite("count-rate inputs"));
        }
        if mean_intensity < 0.0 {
            return Err(Error::NegativeMean(mean_intensity));
        }
        if !(exposure > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "exposure must be positive, got {exposure}"
            )));
        }
        let lambda = mean_intensity * exposure;
        if lambda == 0.0 {
            return Ok(0);
        }
        let poisson = Poisson::new(lambda).map_err(|e| Error::InvalidConfig(format!("Poisson mean {lambda}: {e}")))?;
        Ok(poisson.sample(&mut self.rng) as u64)
    }
}

/// Single seeded count with mean `mean_intensity × exposure`.
pub fn sample_counts(mean_intensity: f64, exposure: f64, seed: u64) -> Result<u64> {
    ShotNoise::new(seed).sample(mean_intensity, exposure)
}

/// Counts for both detectors of one eraser record.
pub fn sample_record(record: &EraserRecord, exposure: f64, seed: u64) -> Result<CountSample> {
    let mut noise = ShotNoise::new(seed);
    let counts_a = noise.sample(record.intensity_a, exposure)?;
    let counts_b = noise.sample(record.intensity_b, exposure)?;
    Ok(CountSample {
        counts_a,
        counts_b,
        exposure,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    #[test]
    fn slm_phase_law() {
        assert_eq!(make_slm(1).unwrap().phases(), &[0.0]);
        assert_eq!(make_slm(2).unwrap().phases(), &[0.0, FRAC_PI_2]);
        let ten = make_slm(10).unwrap();
        assert_abs_diff_eq!(ten.phases()[2], PI / 5.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ten.phases()[7], 7.0 * PI / 10.0, epsilon = 1e-15);
        assert_eq!(make_slm(0), Err(Error::ZeroPixels));
        assert!(SlmArray::from_phases(vec![0.0, f64::NAN]).is_err());
    }

    #[test]
    fn slm_apply_cases() {
        let f = JonesVector::from_real(0.3, -0.8).unwrap();
        assert_eq!(slm_apply(f, 0.0), f);
        let diag = JonesVector::from_real(FRAC_1_SQRT_2, FRAC_1_SQRT_2).unwrap();
        let flipped = slm_apply(diag, PI);
        assert_abs_diff_eq!(flipped.h.re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(flipped.v.re, -FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(flipped.v.im, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(flipped.intensity(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn output_b_through_slm_matches_eq4_shape() {
        // (1/2)(1 + cos(φ − ξ)) after the polarizer, before referring to the passed ensemble
        let (phi, xi) = (1.1, 0.4);
        let config = ApparatusConfig::new(1.0, phi, 1).unwrap();
        let (_, b) = mzi_outputs(&config).unwrap();
        let got = intensity(project_polarizer(slm_apply(b, xi), POLARIZER_ANGLE));
        assert_abs_diff_eq!(got, 0.25 * (1.0 + (phi - xi).cos()), epsilon = 1e-15);
    }

    #[test]
    fn single_pixel_at_zero_phase() {
        let config = ApparatusConfig::new(1.5, 0.0, 1).unwrap();
        let recs = measure_erasers(&config, &make_slm(1).unwrap()).unwrap();
        assert_eq!(recs.len(), 1);
        assert_abs_diff_eq!(recs[0].intensity_a, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(recs[0].intensity_b, 2.25, epsilon = 1e-14);
    }

    #[test]
    fn two_pixels_at_quarter_wave() {
        let config = ApparatusConfig::new(1.0, FRAC_PI_2, 2).unwrap();
        let recs = measure_erasers(&config, &make_slm(2).unwrap()).unwrap();
        assert_abs_diff_eq!(recs[0].intensity_a, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(recs[0].intensity_b, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(recs[1].intensity_a, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(recs[1].intensity_b, 0.5, epsilon = 1e-15);
        assert_eq!(recs[1].psi, FRAC_PI_2 - recs[1].xi);
    }

    #[test]
    fn pixel_count_mismatch_rejected() {
        let config = ApparatusConfig::new(1.0, 0.0, 3).unwrap();
        assert_eq!(
            measure_erasers(&config, &make_slm(2).unwrap()),
            Err(Error::PixelCountMismatch { config: 3, slm: 2 })
        );
    }

    #[test]
    fn zero_mean_gives_zero_counts() {
        for seed in 0..20 {
            assert_eq!(sample_counts(0.0, 3.0, seed).unwrap(), 0);
        }
    }

    #[test]
    fn counts_are_seed_deterministic() {
        let a = sample_counts(1234.5, 2.0, 42).unwrap();
        let b = sample_counts(1234.5, 2.0, 42).unwrap();
        assert_eq!(a, b);
        let rec = EraserRecord::closed_form(&ApparatusConfig::new(1.0, 0.7, 4).unwrap(), 1, PI / 4.0);
        assert_eq!(
            sample_record(&rec, 1e4, 42).unwrap(),
            sample_record(&rec, 1e4, 42).unwrap()
        );
    }

    #[test]
    fn bad_count_inputs_rejected() {
        assert_eq!(sample_counts(-1.0, 1.0, 0), Err(Error::NegativeMean(-1.0)));
        assert!(sample_counts(1.0, 0.0, 0).is_err());
        assert!(sample_counts(f64::NAN, 1.0, 0).is_err());
    }

    #[test]
    fn large_mean_stays_within_four_sigma() {
        // λ = 1e4 × 100 = 1e6; two-sided 4σ tail ≈ 6.3e-5, so expect ≲ 1 escape in 1e4 seeds
        let lambda = 1e6_f64;
        let bound = 4.0 * lambda.sqrt();
        let escapes = (0..10_000u64)
            .filter(|&seed| {
                let k = sample_counts(1e4, 100.0, seed).unwrap() as f64;
                (k - lambda).abs() > bound
            })
            .count();
        assert!(escapes <= 5, "{escapes} draws outside λ ± 4√λ");
    }

    #[test]
    fn empirical_mean_matches_lambda() {
        let lambda = 1e4;
        let n = 100_000u64;
        let total: u64 = (0..n).map(|seed| sample_counts(lambda, 1.0, seed).unwrap()).sum();
        let mean = total as f64 / n as f64;
        assert!((mean - lambda).abs() / lambda < 0.01, "mean {mean}");
    }
}
