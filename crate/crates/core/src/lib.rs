//! Simulation of a superresolving spectrometer built from a Mach-Zehnder
//! interferometer, a pair of phase-stepped spatial light modulators, and
//! polarizer-projected photodiode arrays.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod correlation;
pub mod eraser;
pub mod error;
pub mod grid;
pub mod optics;
pub mod sensitivity;
pub mod spectral;
pub mod spectrometer;

pub use correlation::{
    closed_form_trace, correlation_trace, fringe_metrics, log_correlation, pair_product, CorrelationTrace,
    FringeMetrics, Sampling,
};
pub use eraser::{
    make_slm, measure_erasers, propagate_erasers, sample_counts, slm_apply, CountSample, EraserRecord, ShotNoise,
    SlmArray,
};
pub use error::{Error, Result};
pub use grid::ScanGrid;
pub use optics::{
    hwp_transform, intensity, mzi_closed_form, mzi_outputs, project_polarizer, ApparatusConfig, ComplexAmplitude,
    JonesVector,
};
