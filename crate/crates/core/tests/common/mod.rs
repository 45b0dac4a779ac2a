#![allow(dead_code)]

use std::path::PathBuf;

use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use qcomb::biphoton::{apply_delay, assemble_jsa_mono, exchange_overlap, Axis, Jsa, SpectralGrid};
use qcomb::cavity::CavitySpec;
use qcomb::config::{emit_config, parse_config, FitSettingsConfig, HomSettings, RunConfig, SweepSettings};
use qcomb::estimation::{ModelContext, Parameter};
use qcomb::export;
use qcomb::hom::{coincidence_probabilities, coincidence_trace, linspace};
use qcomb::spectral::{FilterShape, FilterSpec, PhaseMatchShape, PhaseMatchSpec, PumpMode, PumpSpec};
use qcomb::units::{ghz, thz};

pub const CASES: u32 = 100;

pub type Suite = fn(&mut TestRunner) -> Result<(), String>;

pub fn device_fsr() -> f64 {
    ghz(19.2)
}

pub fn device_bandwidth() -> f64 {
    thz(21.82)
}

/// Monochromatic reference device: 19.2 GHz FSR, R = 0.27/0.24, sinc phase
/// matching of 2π·21.82 THz, pumped on the resonance nearest 391.9 THz
/// (or one FSR above it for the anti-resonant state).
pub fn device_context(anti_resonant: bool) -> ModelContext {
    let cavity = CavitySpec::new(device_fsr(), 0.27, 0.24).unwrap();
    let resonant = cavity.resonant_pump_near(thz(391.9));
    let pump = PumpSpec::monochromatic(resonant + if anti_resonant { cavity.fsr } else { 0.0 }).unwrap();
    let phase_match = PhaseMatchSpec::new(0.5 * resonant, device_bandwidth(), PhaseMatchShape::Sinc).unwrap();
    let grid = SpectralGrid::line(Axis::symmetric(6.0 * device_bandwidth(), (1 << 17) + 1).unwrap());
    ModelContext { pump, phase_match, cavity, grid, delay: 0.0, filter: None }
}

pub fn run(name: &str, cases: u32, test: impl Fn(&mut TestRunner) -> Result<(), String>) -> Result<(), String> {
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    test(&mut runner).map_err(|e| format!("{name}: {e}"))
}

/// |S| ≤ 1 for arbitrary complex amplitudes on a symmetric grid.
pub fn overlap_bound(runner: &mut TestRunner) -> Result<(), String> {
    let amps = prop::collection::vec((-1e3_f64..1e3, -1e3_f64..1e3), 1..200);
    runner
        .run(&amps, |mut pairs| {
            if pairs.len().is_multiple_of(2) {
                pairs.push((0.5, -0.25));
            }
            let n = pairs.len().max(3);
            pairs.resize(n, (1.0, 0.0));
            let grid = SpectralGrid::line(Axis::symmetric(10.0, n).unwrap());
            let amplitudes: Vec<Complex64> = pairs.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
            let jsa = Jsa { grid, amplitudes, factors: Vec::new(), pump_frequency: 1.0 };
            let s = exchange_overlap(&jsa).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert!(s.norm() <= 1.0 + 1e-12, "|S| = {}", s.norm());
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn small_state(r_s: f64, r_i: f64, detuning: f64, walkoff: f64, dispersion: f64) -> Jsa {
    let cavity = CavitySpec::new(1.0, r_s, r_i).unwrap();
    let pump = PumpSpec::monochromatic(2000.0 + detuning).unwrap();
    let pm = PhaseMatchSpec::new(1000.0, 8.0, PhaseMatchShape::Sinc).unwrap().with_phase(walkoff, dispersion);
    let grid = SpectralGrid::line(Axis::symmetric(24.0, 4001).unwrap());
    assemble_jsa_mono(&pump, &pm, &cavity, &grid).unwrap()
}

/// apply_delay(apply_delay(C, a), b) = apply_delay(C, a + b).
pub fn delay_composition(runner: &mut TestRunner) -> Result<(), String> {
    let strategy = (0.0_f64..0.8, 0.0_f64..0.8, -2.0_f64..2.0, -5.0_f64..5.0, -5.0_f64..5.0);
    runner
        .run(&strategy, |(r_s, r_i, det, a, b)| {
            let jsa = small_state(r_s, r_i, det, 0.0, 0.0);
            let two = apply_delay(&apply_delay(&jsa, a), b);
            let one = apply_delay(&jsa, a + b);
            for (x, y) in two.amplitudes.iter().zip(&one.amplitudes) {
                prop_assert!((x - y).norm() <= 1e-10 * x.norm().max(1e-300), "{x} vs {y}");
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// With κ₁ = 0 and equal mirror reflectivities the HOM trace is even in τ.
/// Unequal reflectivities make C(ω₋)C*(−ω₋) complex and break it.
pub fn trace_symmetry(runner: &mut TestRunner) -> Result<(), String> {
    let strategy = (0.0_f64..0.8, -1.0_f64..1.0, -0.05_f64..0.05, 0.0_f64..3.0);
    runner
        .run(&strategy, |(r, det, k2, tau)| {
            let jsa = small_state(r, r, det, 0.0, k2);
            let p = coincidence_probabilities(&jsa, &[tau, -tau]).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert!((p[0] - p[1]).abs() <= 1e-10, "{} vs {}", p[0], p[1]);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// R = 0.999 comb states repeat every π/ω̄ within 1% over ±2 periods. For
/// anti-resonant combs each half round trip mirrors the trace, P → 1 − P.
pub fn comb_revival(runner: &mut TestRunner) -> Result<(), String> {
    let strategy = (4.0_f64..8.0, prop::bool::ANY, -0.3_f64..0.3);
    runner
        .run(&strategy, |(bw, anti, tau)| {
            let cavity = CavitySpec::symmetric(1.0, 0.999).unwrap();
            let pump = PumpSpec::monochromatic(if anti { 2001.0 } else { 2000.0 }).unwrap();
            let pm = PhaseMatchSpec::new(1000.0, bw, PhaseMatchShape::Gaussian).unwrap();
            let lw = qcomb::cavity::narrowest_linewidth(&cavity).unwrap();
            let span = 3.0 * bw;
            let points = ((span / (lw / 8.0)).ceil() as usize + 1) | 1;
            let grid = SpectralGrid::line(Axis::symmetric(span, points).unwrap());
            let jsa = assemble_jsa_mono(&pump, &pm, &cavity, &grid).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let period = std::f64::consts::PI;
            let delays: Vec<f64> = (-2..=2).map(|k| tau + k as f64 * period).collect();
            let p = coincidence_probabilities(&jsa, &delays).map_err(|e| TestCaseError::fail(e.to_string()))?;
            for (k, v) in p.iter().enumerate() {
                let expected = if anti && !k.is_multiple_of(2) { 1.0 - p[2] } else { p[2] };
                prop_assert!((v - expected).abs() <= 0.01, "{p:?}");
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

pub fn config_strategy() -> impl Strategy<Value = RunConfig> {
    let cavity = (1e9_f64..1e12, 0.0_f64..0.99, 0.0_f64..0.99, -1.0_f64..1.0, prop::bool::ANY);
    let spectra = (
        1e14_f64..1e16,
        prop::bool::ANY,
        1e10_f64..1e14,
        0.3_f64..0.7,
        1e11_f64..1e15,
        -1e-12_f64..1e-12,
        -1e-24_f64..1e-24,
        prop::bool::ANY,
    );
    let grid = (1e11_f64..1e16, 3_usize..100_000, 3_usize..2_000, -1e14_f64..1e14);
    let extras = (
        -1e-10_f64..1e-10,
        prop::option::of((1e10_f64..1e15, prop::bool::ANY)),
        "[a-z][a-z0-9_/]{0,15}",
        any::<u64>(),
        (prop::option::of(1e-14_f64..1e-9), -1e-12_f64..1e-12, 20_usize..5000),
        (2_usize..500, prop::option::of(-1e-10_f64..1e-10)),
        (prop::option::of("[a-z]{1,8}\\.csv"), 1_usize..16, prop::bool::ANY, prop::collection::vec(0_usize..5, 0..4), 1.0_f64..1e7, prop::bool::ANY),
    );
    (cavity, spectra, grid, extras).prop_map(|(c, s, g, x)| {
        let (fsr, r_s, r_i, off, medium_inside) = c;
        let (center, broadband, linewidth, deg_frac, bandwidth, walkoff, dispersion, sinc) = s;
        let (span, points, points_plus, center_minus) = g;
        let (delay, filter, out, seed, hom, sweep, fit) = x;
        let pump = PumpSpec {
            center,
            mode: if broadband { PumpMode::GaussianBroadband } else { PumpMode::Monochromatic },
            linewidth: if broadband { linewidth } else { 0.0 },
        };
        let minus = Axis { center: center_minus, span, points };
        let grid = if broadband {
            SpectralGrid::plane(Axis { center, span: 0.5 * span, points: points_plus }, minus)
        } else {
            SpectralGrid::line(minus)
        };
        let mut fixed: Vec<Parameter> = Vec::new();
        for i in fit.3 {
            let p = Parameter::ALL[i];
            if !fixed.contains(&p) {
                fixed.push(p);
            }
        }
        RunConfig {
            pump,
            phase_match: PhaseMatchSpec {
                degeneracy: deg_frac * center,
                bandwidth,
                walkoff,
                dispersion,
                shape: if sinc { PhaseMatchShape::Sinc } else { PhaseMatchShape::Gaussian },
            },
            cavity: CavitySpec {
                fsr,
                reflectivity_signal: r_s,
                reflectivity_idler: r_i,
                resonance_offset: off * fsr,
                medium_inside,
            },
            grid,
            delay,
            filter: filter.map(|(bw, top)| FilterSpec {
                center: deg_frac * center,
                bandwidth: bw,
                shape: if top { FilterShape::TopHat } else { FilterShape::Gaussian },
            }),
            output_dir: PathBuf::from(out),
            seed,
            hom: HomSettings { span: hom.0, center: hom.1, points: hom.2 },
            sweep: SweepSettings { steps: sweep.0, delay: sweep.1 },
            fit: FitSettingsConfig {
                data: fit.0.map(PathBuf::from),
                starts: fit.1,
                poisson_weights: fit.2,
                fixed,
                pairs_per_bin: fit.4,
                noiseless: fit.5,
            },
        }
    })
}

/// parse_config(emit_config(c)) = c.
pub fn config_round_trip(runner: &mut TestRunner) -> Result<(), String> {
    runner
        .run(&config_strategy(), |c| {
            let text = emit_config(&c);
            let back = parse_config(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
            prop_assert_eq!(back, c);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Same configuration, same bytes.
pub fn output_determinism(runner: &mut TestRunner) -> Result<(), String> {
    let strategy = (0.0_f64..0.8, -1.0_f64..1.0, 0.0_f64..0.05, 0.0_f64..0.01, 0.0_f64..3.0);
    runner
        .run(&strategy, |(r, det, k1, k2, tau)| {
            let produce = || -> Result<(String, String), String> {
                let mut jsa = small_state(r, r, det, k1, k2);
                jsa = apply_delay(&jsa, tau);
                let trace = coincidence_trace(&jsa, &linspace(-4.0, 4.0, 161)).map_err(|e| e.to_string())?;
                Ok((export::jsi_csv(&jsa, "h"), export::trace_csv(&trace, "h")))
            };
            let a = produce().map_err(TestCaseError::fail)?;
            let b = produce().map_err(TestCaseError::fail)?;
            prop_assert!(a == b);
            Ok(())
        })
        .map_err(|e| e.to_string())
}
