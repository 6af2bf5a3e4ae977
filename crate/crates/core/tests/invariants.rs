use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

use slmspec::baselines::{nslit_trace, NSlitModel};
use slmspec::correlation::{closed_form_trace, correlation_trace, fringe_metrics, log_correlation, Sampling};
use slmspec::eraser::{make_slm, measure_erasers, propagate_erasers};
use slmspec::optics::{hwp_transform, mzi_closed_form, mzi_outputs, ApparatusConfig, JonesVector};
use slmspec::sensitivity::{differentiate, gain_curve};
use slmspec::spectrometer::{
    auto_scan_grid, beat_traces, count_beats, estimate_frequency, BeatScanConfig, ReferenceSetup, TraceSource,
};
use slmspec::ScanGrid;

fn finite_component() -> impl Strategy<Value = f64> {
    -10.0..10.0f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn hwp_preserves_intensity(
        hr in finite_component(), hi in finite_component(),
        vr in finite_component(), vi in finite_component(),
        theta in -2.0 * PI..2.0 * PI,
    ) {
        let field = JonesVector::new(Complex64::new(hr, hi), Complex64::new(vr, vi)).unwrap();
        let out = hwp_transform(field, theta).unwrap();
        let before = field.intensity();
        prop_assert!((out.intensity() - before).abs() <= 1e-12 * before.max(1.0));
    }
}

proptest! {
    #[test]
    fn mzi_energy_and_closed_form(e0 in 0.01..100.0f64, phi in -50.0..50.0f64) {
        let config = ApparatusConfig::new(e0, phi, 1).unwrap();
        let (a, b) = mzi_outputs(&config).unwrap();
        let i0 = e0 * e0;
        prop_assert!((a.intensity() + b.intensity() - i0).abs() <= 1e-12 * i0);
        let (ca, cb) = mzi_closed_form(e0, phi);
        // normalize out the phase of the first nonzero component, then compare
        let g = a.h / a.h.norm();
        let gc = ca.h / ca.h.norm();
        for (x, y) in [(a.h / g, ca.h / gc), (a.v / g, ca.v / gc), (b.h / g, cb.h / gc), (b.v / g, cb.v / gc)] {
            prop_assert!((x - y).norm() <= 1e-12 * e0);
        }
    }

    #[test]
    fn eraser_out_of_phase_and_conservation(n in 1usize..40, phi in -20.0..20.0f64, e0 in 0.1..10.0f64) {
        let slm = make_slm(n).unwrap();
        let here = measure_erasers(&ApparatusConfig::new(e0, phi, n).unwrap(), &slm).unwrap();
        let shifted = measure_erasers(&ApparatusConfig::new(e0, phi + PI, n).unwrap(), &slm).unwrap();
        let per_pixel = e0 * e0 / n as f64;
        for (r, s) in here.iter().zip(&shifted) {
            prop_assert!((r.intensity_a - s.intensity_b).abs() <= 1e-12 * per_pixel);
            prop_assert!((r.intensity_a + r.intensity_b - per_pixel).abs() <= 1e-12 * per_pixel);
            prop_assert_eq!(r.psi, phi - r.xi);
        }
    }

    #[test]
    fn beat_magnitude_is_sign_blind(x in 0.02..0.2f64, n in prop::sample::select(vec![2usize, 5, 10])) {
        let grid = auto_scan_grid(n, x, x).unwrap();
        let setup = ReferenceSetup::new(1.0, n, grid).unwrap();
        let estimate = |ratio: f64| {
            let config = BeatScanConfig::new(setup, ratio).unwrap();
            let (u, _) = beat_traces(&config, TraceSource::ClosedForm).unwrap();
            estimate_frequency(&setup, &u).unwrap().delta_f_magnitude
        };
        let (plus, minus) = (estimate(1.0 + x), estimate(1.0 - x));
        // f0 = 1, so this is an absolute 1e-9 in units of the reference frequency
        prop_assert!((plus - minus).abs() <= 1e-9, "{} vs {}", plus, minus);
    }
}

#[test]
fn pipeline_matches_closed_form_on_dense_grid() {
    for n in [1usize, 2, 10, 100] {
        let slm = make_slm(n).unwrap();
        let grid = ScanGrid::new(-PI, PI, 10_000).unwrap();
        let scale = 1.0 / n as f64;
        for phi in grid.points() {
            let config = ApparatusConfig::new(1.0, phi, n).unwrap();
            for (j, (ia, ib)) in propagate_erasers(&config, &slm).unwrap().into_iter().enumerate() {
                let psi = phi - slm.phases()[j];
                let ea = 0.5 * scale * (1.0 - psi.cos());
                let eb = 0.5 * scale * (1.0 + psi.cos());
                assert!(
                    (ia - ea).abs() <= 1e-12 && (ib - eb).abs() <= 1e-12,
                    "N={n} φ={phi} j={j}"
                );
            }
        }
    }
}

#[test]
fn log_domain_survives_where_linear_product_underflows() {
    let n = 10_000;
    let slm = make_slm(n).unwrap();
    let phi = PI / (2.0 * n as f64); // a superresolved peak
    let config = ApparatusConfig::new(1.0, phi, n).unwrap();
    let records = measure_erasers(&config, &slm).unwrap();
    let linear: f64 = records.iter().map(|r| r.intensity_a * r.intensity_b).product();
    assert_eq!(linear, 0.0);
    let log = log_correlation(&config, &slm).unwrap();
    assert!(log.is_finite());
    // Π (1/(4N²)) sin²ψ_j = (4N²)^{−N} · 4^{1−N} · sin²(Nφ)
    let nf = n as f64;
    let expected = -nf * (4.0 * nf * nf).ln() + (1.0 - nf) * 4f64.ln();
    assert!((log - expected).abs() <= 1e-9 * expected.abs());
}

#[test]
fn fringe_count_and_resolution_scale_with_n() {
    for n in [2usize, 10, 100] {
        let grid = ScanGrid::new(0.0, 2.0 * PI, 80 * n + 1).unwrap();
        let trace = correlation_trace(
            &ApparatusConfig::new(1.0, 0.0, n).unwrap(),
            &make_slm(n).unwrap(),
            &grid,
            Sampling::Enforced,
        )
        .unwrap();
        let m = fringe_metrics(&trace).unwrap();
        assert_eq!(m.peak_count, 2 * n);
        let expected = PI / (2.0 * n as f64);
        assert!((m.resolution_delta.unwrap() - expected).abs() <= grid.step());
    }
}

#[test]
fn nslit_null_to_peak_is_pi_over_n() {
    for n in [3usize, 10, 50] {
        let grid = ScanGrid::new(-PI / 2.0, PI / 2.0, 400 * n + 1).unwrap();
        let trace = nslit_trace(&NSlitModel::point_slits(n).unwrap(), &grid).unwrap();
        let m = fringe_metrics(&trace).unwrap();
        assert_eq!(m.peak_count, 1, "N={n}");
        assert!((m.resolution_delta.unwrap() - PI / n as f64).abs() <= grid.step());
    }
}

#[test]
fn finite_difference_error_within_bound() {
    for n in [1usize, 2, 10] {
        let grid = ScanGrid::new(-PI / 2.0, PI / 2.0, 4001).unwrap();
        let h = grid.step();
        let slope = differentiate(&closed_form_trace(n, &grid).unwrap()).unwrap();
        let nf = n as f64;
        let max_err = grid
            .points()
            .zip(&slope.slope_values)
            .map(|(phi, s)| (s - nf * (2.0 * nf * phi).sin()).abs())
            .fold(0.0, f64::max);
        assert!(max_err <= 10.0 * h * h * nf.powi(3), "N={n}: {max_err}");
    }
}

#[test]
fn gain_ratio_increases_with_n() {
    let rows = gain_curve(&[2, 10, 100]).unwrap();
    assert!(rows.windows(2).all(|w| w[1].ratio() > w[0].ratio()));
    // grating stays flat: N=100 vs N=2 within a factor of about two
    let flat = rows[2].classical / rows[0].classical;
    assert!(flat > 0.5 && flat < 2.0, "{flat}");
}

#[test]
fn beat_count_scales_with_order() {
    let counts: Vec<usize> = [2usize, 10, 100]
        .iter()
        .map(|&n| {
            let grid = ScanGrid::with_max_step(-10.0 * PI, 10.0 * PI, PI / (40.0 * n as f64)).unwrap();
            let config = BeatScanConfig::new(ReferenceSetup::new(1.0, n, grid).unwrap(), 1.1).unwrap();
            let (u, r) = beat_traces(&config, TraceSource::ClosedForm).unwrap();
            count_beats(&u, &r).unwrap()
        })
        .collect();
    assert_eq!(counts[0], 4);
    for (count, n) in counts.iter().zip([2usize, 10, 100]) {
        let expected = counts[0] as f64 * n as f64 / 2.0;
        assert!((*count as f64 - expected).abs() <= 1.0, "N={n}: {count} vs {expected}");
    }
}
