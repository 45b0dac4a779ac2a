mod common;

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use qcomb::biphoton::{apply_filter, assemble_jsa_mono, exchange_overlap, jsi, Axis, Jsa, SpectralGrid};
use qcomb::cavity::{amplitude_transmission, CavitySpec};
use qcomb::estimation::{
    fit_hom_trace, minimize, Bounds, poisson_counts, FitProblem, FitSettings, ModelContext, NelderMeadSettings, Parameter,
};
use qcomb::hom::{coincidence_probabilities, linspace};
use qcomb::spectral::{
    eval_filter, eval_phase_match, FilterShape, FilterSpec, PhaseMatchShape, PhaseMatchSpec, Photon, PumpSpec,
};

fn config() -> ProptestConfig {
    ProptestConfig { cases: common::CASES, failure_persistence: None, ..ProptestConfig::default() }
}

fn suite(name: &str, f: common::Suite) {
    if let Err(e) = common::run(name, common::CASES, f) {
        panic!("{e}");
    }
}

#[test]
fn overlap_is_bounded() {
    suite("overlap bound", common::overlap_bound);
}

#[test]
fn delays_compose() {
    suite("delay composition", common::delay_composition);
}

#[test]
fn trace_is_even_without_walkoff() {
    suite("trace symmetry", common::trace_symmetry);
}

#[test]
fn combs_revive_every_half_round_trip() {
    suite("comb revival", common::comb_revival);
}

#[test]
fn config_round_trips() {
    suite("config round trip", common::config_round_trip);
}

#[test]
fn outputs_are_deterministic() {
    suite("output determinism", common::output_determinism);
}

fn shape() -> impl Strategy<Value = PhaseMatchShape> {
    prop_oneof![Just(PhaseMatchShape::Sinc), Just(PhaseMatchShape::Gaussian)]
}

fn filter_shape() -> impl Strategy<Value = FilterShape> {
    prop_oneof![Just(FilterShape::TopHat), Just(FilterShape::Gaussian)]
}

fn arbitrary_state(pairs: Vec<(f64, f64)>) -> Jsa {
    let mut amps: Vec<Complex64> = pairs.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
    if amps.len().is_multiple_of(2) {
        amps.push(Complex64::new(1.0, 0.0));
    }
    while amps.len() < 3 {
        amps.push(Complex64::new(0.5, 0.0));
    }
    let grid = SpectralGrid::line(Axis::symmetric(4.0, amps.len()).unwrap());
    Jsa { grid, amplitudes: amps, factors: Vec::new(), pump_frequency: 1.0 }
}

fn tiny_context() -> ModelContext {
    let cavity = CavitySpec::none(1.0).unwrap();
    let pump = PumpSpec::monochromatic(200.0).unwrap();
    let phase_match = PhaseMatchSpec::new(100.0, 4.0, PhaseMatchShape::Sinc).unwrap();
    let grid = SpectralGrid::line(Axis::symmetric(24.0, 257).unwrap());
    ModelContext { pump, phase_match, cavity, grid, delay: 0.0, filter: None }
}

fn tiny_problem(bandwidth: f64, walkoff: f64, amplitude: f64, offset: f64) -> FitProblem {
    let ctx = tiny_context();
    let delays = linspace(-6.0, 6.0, 41);
    let counts = ctx.counts(&[bandwidth, walkoff, 0.0, amplitude, offset], &delays).unwrap();
    let guess = [1.1 * bandwidth, 0.8 * walkoff, 0.0, 0.9 * amplitude, 0.5 * offset];
    FitProblem::new(delays, counts, guess, ctx)
        .with_bounds(Parameter::Walkoff, Bounds::new(-2.0, 2.0))
        .fix(Parameter::Dispersion, 0.0)
}

fn one_start() -> FitSettings {
    FitSettings { starts: 1, seed: 0, nelder_mead: NelderMeadSettings::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn airy_is_periodic_bounded_and_peaks_on_resonance(
        r in 0.0_f64..0.99,
        offset in -0.5_f64..0.5,
        omega in -50.0_f64..50.0,
        m in -20_i32..20,
    ) {
        let mut cav = CavitySpec::symmetric(1.0, r).unwrap();
        cav.resonance_offset = offset;
        let t = amplitude_transmission(&cav, Photon::Signal, omega).norm_sqr();
        let shifted = amplitude_transmission(&cav, Photon::Signal, omega + m as f64).norm_sqr();
        prop_assert!((t - shifted).abs() <= 1e-9);
        let floor = ((1.0 - r) / (1.0 + r)).powi(2);
        prop_assert!(t <= 1.0 + 1e-12 && t >= floor - 1e-12);
        let peak = amplitude_transmission(&cav, Photon::Idler, offset + m as f64).norm_sqr();
        prop_assert!((peak - 1.0).abs() <= 1e-9);
        let trough = amplitude_transmission(&cav, Photon::Idler, offset + m as f64 + 0.5).norm_sqr();
        prop_assert!((trough - floor).abs() <= 1e-9);
    }

    #[test]
    fn phase_matching_symmetries(
        bw in 0.1_f64..100.0,
        w in -300.0_f64..300.0,
        k2 in -1.0_f64..1.0,
        k1 in -1.0_f64..1.0,
        shape in shape(),
    ) {
        let pm = PhaseMatchSpec::new(1000.0, bw, shape).unwrap();
        let even = pm.with_phase(0.0, k2);
        let a = eval_phase_match(&even, 2000.0, w);
        let b = eval_phase_match(&even, 2000.0, -w);
        prop_assert!((a - b).norm() <= 1e-12);
        prop_assert!(a.norm() <= 1.0 + 1e-12);
        let walk = pm.with_phase(k1, 0.0);
        let a = eval_phase_match(&walk, 2000.0, w);
        let b = eval_phase_match(&walk, 2000.0, -w);
        prop_assert!((a - b.conj()).norm() <= 1e-12);
    }

    #[test]
    fn filters_never_amplify(
        center in -10.0_f64..10.0,
        bw in 0.01_f64..10.0,
        omega in -50.0_f64..50.0,
        shape in filter_shape(),
    ) {
        let f = FilterSpec::new(center, bw, shape).unwrap();
        let v = eval_filter(&f, omega);
        prop_assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn filtering_never_adds_norm(
        r in 0.0_f64..0.8,
        center_offset in -3.0_f64..3.0,
        bw in 2.0_f64..20.0,
        shape in filter_shape(),
    ) {
        let cav = CavitySpec::symmetric(1.0, r).unwrap();
        let pump = PumpSpec::monochromatic(2000.0).unwrap();
        let pm = PhaseMatchSpec::new(1000.0, 8.0, PhaseMatchShape::Sinc).unwrap();
        let grid = SpectralGrid::line(Axis::symmetric(24.0, 4001).unwrap());
        let jsa = assemble_jsa_mono(&pump, &pm, &cav, &grid).unwrap();
        let filter = FilterSpec::new(1000.0 + center_offset, bw, shape).unwrap();
        if let Ok(filtered) = apply_filter(&jsa, &filter) {
            prop_assert!(filtered.norm_sqr() <= jsa.norm_sqr() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn probabilities_and_intensities_are_physical(
        pairs in prop::collection::vec((-10.0_f64..10.0, -10.0_f64..10.0), 3..120),
        delays in prop::collection::vec(-20.0_f64..20.0, 1..20),
    ) {
        let jsa = arbitrary_state(pairs);
        prop_assert!(jsi(&jsa).iter().all(|v| *v >= 0.0));
        let p = coincidence_probabilities(&jsa, &delays).unwrap();
        prop_assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
        let s = exchange_overlap(&jsa).unwrap();
        let p0 = coincidence_probabilities(&jsa, &[0.0]).unwrap()[0];
        prop_assert!((p0 - 0.5 * (1.0 - s.re)).abs() <= 1e-12);
    }

    #[test]
    fn simplex_history_never_increases(
        cx in -0.5_f64..1.5,
        cy in -0.5_f64..1.5,
        sx in 0.0_f64..=1.0,
        sy in 0.0_f64..=1.0,
        stretch in 0.1_f64..10.0,
    ) {
        let f = |x: &[f64]| (x[0] - cx).powi(2) + stretch * (x[1] - cy).powi(2) + (8.0 * x[0] * x[1]).sin().powi(2);
        let out = minimize(f, &[sx, sy], &NelderMeadSettings::default());
        prop_assert!(out.history.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(out.value <= f(&[sx, sy]));
        prop_assert!(out.point.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn poisson_draws_are_reproducible(
        probs in prop::collection::vec(0.0_f64..1.0, 1..100),
        pairs in 1.0_f64..1e5,
        seed in any::<u64>(),
    ) {
        let a = poisson_counts(&probs, pairs, seed).unwrap();
        let b = poisson_counts(&probs, pairs, seed).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.iter().all(|c| *c >= 0.0 && c.fract() == 0.0));
    }

    #[test]
    fn fits_are_idempotent_deterministic_and_scale_equivariant(
        bandwidth in 2.0_f64..6.0,
        walkoff in 0.1_f64..1.0,
        amplitude in 1e2_f64..1e4,
        offset in 1.0_f64..50.0,
        k in 0.5_f64..20.0,
    ) {
        let problem = tiny_problem(bandwidth, walkoff, amplitude, offset);
        let first = fit_hom_trace(&problem, &one_start()).unwrap();
        let again = fit_hom_trace(&problem, &one_start()).unwrap();
        prop_assert_eq!(&first, &again);

        let mut refit = problem.clone();
        refit.initial = first.theta();
        let second = fit_hom_trace(&refit, &one_start()).unwrap();
        prop_assert!(second.residual <= first.residual * (1.0 + 1e-12) + 1e-300);

        let mut scaled = tiny_problem(bandwidth, walkoff, k * amplitude, k * offset);
        scaled.initial = problem.initial;
        scaled.initial[Parameter::Amplitude.index()] *= k;
        scaled.initial[Parameter::Offset.index()] *= k;
        let s = fit_hom_trace(&scaled, &one_start()).unwrap();
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-3 * a.abs().max(b.abs()).max(1e-9);
        prop_assert!(close(s.value(Parameter::Bandwidth), first.value(Parameter::Bandwidth)));
        prop_assert!(close(s.value(Parameter::Walkoff), first.value(Parameter::Walkoff)));
        prop_assert!(close(s.value(Parameter::Amplitude), k * first.value(Parameter::Amplitude)));
        prop_assert!(close(s.value(Parameter::Offset), k * first.value(Parameter::Offset)));
        prop_assert!((s.residual - k * k * first.residual).abs() <= 1e-3 * k * k * first.residual + 1e-9 * (k * amplitude).powi(2));
    }
}

#[test]
fn half_round_trip_is_pi_over_fsr() {
    let cav = CavitySpec::symmetric(common::device_fsr(), 0.27).unwrap();
    assert_eq!(cav.half_round_trip(), PI / common::device_fsr());
}
