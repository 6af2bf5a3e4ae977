//! Jones-calculus fields and the polarizing Mach-Zehnder front end.
//!
//! A horizontally polarized laser of amplitude `E0` passes a half-wave plate,
//! is split by a polarizing beam splitter (H transmitted to the upper arm, V
//! reflected to the lower arm where the PZT adds `e^{iφ}`), and is recombined
//! on a lossless 50/50 beam splitter. Reflections at either splitter carry a
//! factor `i`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_8};
use std::ops::{Add, Mul};

use crate::error::{Error, Result};

/// Scalar field amplitude in √intensity units.
pub type ComplexAmplitude = Complex64;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Horizontal/vertical field components of a fully polarized beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesVector {
    pub h: ComplexAmplitude,
    pub v: ComplexAmplitude,
}

impl JonesVector {
    pub fn new(h: ComplexAmplitude, v: ComplexAmplitude) -> Result<Self> {
        let field = Self { h, v };
        field.ensure_finite()?;
        Ok(field)
    }

    pub fn from_real(h: f64, v: f64) -> Result<Self> {
        Self::new(Complex64::new(h, 0.0), Complex64::new(v, 0.0))
    }

    pub fn horizontal() -> Self {
        Self {
            h: Complex64::new(1.0, 0.0),
            v: Complex64::new(0.0, 0.0),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.h.is_finite() && self.v.is_finite()
    }

    fn ensure_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite("Jones vector"))
        }
    }

    /// |h|² + |v|².
    pub fn intensity(&self) -> f64 {
        self.h.norm_sqr() + self.v.norm_sqr()
    }
}

impl Add for JonesVector {
    type Output = JonesVector;

    fn add(self, rhs: JonesVector) -> JonesVector {
        JonesVector {
            h: self.h + rhs.h,
            v: self.v + rhs.v,
        }
    }
}

impl Mul<JonesVector> for Complex64 {
    type Output = JonesVector;

    fn mul(self, rhs: JonesVector) -> JonesVector {
        JonesVector {
            h: self * rhs.h,
            v: self * rhs.v,
        }
    }
}

/// Source and interferometer settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApparatusConfig {
    /// Laser amplitude `E0`; the reference intensity is `I0 = E0²`.
    pub input_amplitude: f64,
    /// Half-wave-plate fast-axis angle in radians.
    pub hwp_angle: f64,
    /// MZI phase φ carried by the V arm.
    pub mzi_phase: f64,
    /// Number of SLM pixel pairs.
    pub pixel_count: usize,
}

impl Default for ApparatusConfig {
    fn default() -> Self {
        Self {
            input_amplitude: 1.0,
            hwp_angle: FRAC_PI_8,
            mzi_phase: 0.0,
            pixel_count: 1,
        }
    }
}

impl ApparatusConfig {
    pub fn new(input_amplitude: f64, mzi_phase: f64, pixel_count: usize) -> Result<Self> {
        let config = Self {
            input_amplitude,
            mzi_phase,
            pixel_count,
            ..Self::default()
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_phase(self, mzi_phase: f64) -> Self {
        Self { mzi_phase, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.input_amplitude > 0.0) || !self.input_amplitude.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "input amplitude must be positive and finite, got {}",
                self.input_amplitude
            )));
        }
        if !self.hwp_angle.is_finite() || !self.mzi_phase.is_finite() {
            return Err(Error::NonFinite("apparatus angles"));
        }
        if self.pixel_count == 0 {
            return Err(Error::ZeroPixels);
        }
        Ok(())
    }

    /// `I0 = E0²`.
    pub fn reference_intensity(&self) -> f64 {
        self.input_amplitude * self.input_amplitude
    }
}

/// Half-wave plate with fast axis at `theta`: `[[cos2θ, sin2θ], [sin2θ, −cos2θ]]`.
pub fn hwp_transform(field: JonesVector, theta: f64) -> Result<JonesVector> {
    field.ensure_finite()?;
    if !theta.is_finite() {
        return Err(Error::NonFinite("wave-plate angle"));
    }
    let (s, c) = (2.0 * theta).sin_cos();
    Ok(JonesVector {
        h: c * field.h + s * field.v,
        v: s * field.h - c * field.v,
    })
}

/// Fields at MZI outputs A and B, propagated element by element.
pub fn mzi_outputs(config: &ApparatusConfig) -> Result<(JonesVector, JonesVector)> {
    config.validate()?;
    let input = Complex64::new(config.input_amplitude, 0.0) * JonesVector::horizontal();
    let rotated = hwp_transform(input, config.hwp_angle)?;

    // PBS: H transmits into the upper arm, V reflects (factor i) into the lower arm.
    let upper = JonesVector {
        h: rotated.h,
        v: Complex64::new(0.0, 0.0),
    };
    let lower = JonesVector {
        h: Complex64::new(0.0, 0.0),
        v: I * rotated.v * Complex64::from_polar(1.0, config.mzi_phase),
    };

    // 50/50 BS, i on reflection.
    let t = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let r = Complex64::new(0.0, FRAC_1_SQRT_2);
    let out_a = t * upper + r * lower;
    let out_b = r * upper + t * lower;
    Ok((out_a, out_b))
}

/// Closed-form MZI outputs for the 22.5° wave plate:
/// `E_A = (E0/2)(Ĥ − V̂e^{iφ})`, `E_B = (iE0/2)(Ĥ + V̂e^{iφ})`.
///
/// The `E0/2` prefactor keeps `|E_A|² + |E_B|² = I0` for a lossless splitter.
pub fn mzi_closed_form(input_amplitude: f64, mzi_phase: f64) -> (JonesVector, JonesVector) {
    let half = Complex64::new(input_amplitude / 2.0, 0.0);
    let phase = Complex64::from_polar(1.0, mzi_phase);
    let one = Complex64::new(1.0, 0.0);
    let a = JonesVector {
        h: half * one,
        v: -half * phase,
    };
    let b = JonesVector {
        h: I * half * one,
        v: I * half * phase,
    };
    (a, b)
}

/// Amplitude transmitted by a linear polarizer at `theta`: `h cosθ + v sinθ`.
pub fn project_polarizer(field: JonesVector, theta: f64) -> ComplexAmplitude {
    let (s, c) = theta.sin_cos();
    field.h * c + field.v * s
}

/// `I = E E*`.
pub fn intensity(amp: ComplexAmplitude) -> f64 {
    amp.norm_sqr()
}
