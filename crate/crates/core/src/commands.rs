//! Workflows behind the CLI subcommands. Each writes its products into the
//! configured output directory and returns the written paths.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::biphoton::{
    apply_delay, count_comb_peaks, exchange_overlap, jsi, symmetry_report, Jsa, SymmetryThresholds,
};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::estimation::{
    degeneracy_wavelength, extract_bandwidth_report, fit_hom_trace, poisson_counts, FitProblem, FitSettings,
    ModelContext, NelderMeadSettings, Parameter,
};
use crate::export::{self, SweepRow};
use crate::hom::{coincidence_probabilities, coincidence_trace, feature_width, linspace};
use crate::spectral::PumpSpec;

/// Peak-count threshold used in JSI metadata, as a fraction of the maximum.
pub const PEAK_THRESHOLD: f64 = 0.01;

pub fn model_context(config: &RunConfig) -> ModelContext {
    ModelContext {
        pump: config.pump,
        phase_match: config.phase_match,
        cavity: config.cavity,
        grid: config.grid,
        delay: config.delay,
        filter: config.filter,
    }
}

/// State described by the configuration, with filter and delay stage applied.
pub fn build_state(config: &RunConfig) -> Result<Jsa> {
    let pm = &config.phase_match;
    model_context(config).state(pm.bandwidth, pm.walkoff, pm.dispersion)
}

pub fn hom_delays(config: &RunConfig) -> Vec<f64> {
    config.hom.delays(config.phase_match.bandwidth)
}

pub fn run_jsi(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let jsa = build_state(config)?;
    let hash = export::config_hash(config);
    let report = symmetry_report(&jsa, &config.cavity, SymmetryThresholds::default()).ok();
    let peaks = if jsa.grid.is_2d() { None } else { count_comb_peaks(&jsi(&jsa), PEAK_THRESHOLD).ok() };
    let dir = &config.output_dir;
    Ok(vec![
        export::write_file(dir, "jsi.csv", &export::jsi_csv(&jsa, &hash))?,
        export::write_json(dir, "jsi_meta.json", &export::jsi_meta_json(&jsa, config, report.as_ref(), peaks))?,
    ])
}

pub fn run_hom(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let jsa = build_state(config)?;
    let trace = coincidence_trace(&jsa, &hom_delays(config))?;
    let width = feature_width(&trace).ok();
    let hash = export::config_hash(config);
    let dir = &config.output_dir;
    Ok(vec![
        export::write_file(dir, "trace.csv", &export::trace_csv(&trace, &hash))?,
        export::write_json(dir, "hom_report.json", &export::hom_report_json(&trace, width, config))?,
    ])
}

/// Symmetry and HOM visibility across pump detunings in [0, 2ω̄] from the
/// resonant pump nearest to the configured one. Rows are ordered by detuning.
pub fn sweep_rows(config: &RunConfig) -> Result<Vec<SweepRow>> {
    if config.sweep.steps < 2 {
        return Err(Error::InvalidArgument(format!("sweep needs at least 2 steps, got {}", config.sweep.steps)));
    }
    let base = config.cavity.resonant_pump_near(config.pump.center);
    let tau = config.sweep.delay.unwrap_or(config.cavity.half_round_trip());
    let delays = hom_delays(config);
    let detunings = linspace(0.0, 2.0 * config.cavity.fsr, config.sweep.steps);
    detunings
        .par_iter()
        .map(|&detuning| {
            let mut ctx = model_context(config);
            ctx.pump = PumpSpec { center: base + detuning, ..config.pump };
            ctx.delay = 0.0;
            let pm = &config.phase_match;
            let jsa = apply_delay(&ctx.state(pm.bandwidth, pm.walkoff, pm.dispersion)?, tau);
            let s = exchange_overlap(&jsa)?;
            let trace = coincidence_trace(&jsa, &delays)?;
            Ok(SweepRow {
                detuning,
                exchange_overlap_re: s.re,
                visibility: trace.visibility(),
                kind: trace.extremum_kind,
            })
        })
        .collect()
}

pub fn run_sweep(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let rows = sweep_rows(config)?;
    let hash = export::config_hash(config);
    Ok(vec![export::write_file(&config.output_dir, "sweep.csv", &export::sweep_csv(&rows, &hash))?])
}

/// Synthetic `tau_s,counts` data from the configured state.
pub fn run_simulate(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let jsa = build_state(config)?;
    let delays = hom_delays(config);
    let p = coincidence_probabilities(&jsa, &delays)?;
    let counts = if config.fit.noiseless {
        p.iter().map(|v| config.fit.pairs_per_bin * v).collect()
    } else {
        poisson_counts(&p, config.fit.pairs_per_bin, config.seed)?
    };
    let hash = export::config_hash(config);
    Ok(vec![export::write_file(&config.output_dir, "data.csv", &export::counts_csv(&delays, &counts, &hash))?])
}

/// Fit problem for measured counts, seeded from the configured phase matching.
pub fn fit_problem(config: &RunConfig, delays: Vec<f64>, counts: Vec<f64>) -> FitProblem {
    let pm = &config.phase_match;
    let mut sorted = counts.clone();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let median = sorted.get(sorted.len() / 2).copied().unwrap_or(1.0);
    let initial = [pm.bandwidth, pm.walkoff, pm.dispersion, 2.0 * median.max(1.0), 0.0];
    let mut problem = FitProblem::new(delays, counts, initial, model_context(config));
    problem.poisson_weights = config.fit.poisson_weights;
    for &p in &config.fit.fixed {
        problem = problem.fix(p, initial[p.index()]);
    }
    problem
}

pub fn run_fit(config: &RunConfig, data: Option<&Path>) -> Result<Vec<PathBuf>> {
    let path = data
        .map(Path::to_path_buf)
        .or_else(|| config.fit.data.clone())
        .ok_or_else(|| Error::Config("fit needs a data file (--data or fit.data)".into()))?;
    let (delays, counts) = export::read_counts(&path)?;
    let problem = fit_problem(config, delays, counts);
    let settings = FitSettings { starts: config.fit.starts, seed: config.seed, nelder_mead: NelderMeadSettings::default() };
    let dir = &config.output_dir;
    match fit_hom_trace(&problem, &settings) {
        Ok(result) => {
            let bw = extract_bandwidth_report(&result, degeneracy_wavelength(&config.phase_match)).ok();
            Ok(vec![export::write_json(dir, "fit.json", &export::fit_report_json(&result, bw.as_ref()))?])
        }
        Err(Error::NonConvergence { best }) => {
            export::write_json(dir, "fit.json", &export::fit_report_json(&best, None))?;
            Err(Error::NonConvergence { best })
        }
        Err(e) => Err(e),
    }
}

/// Parameter names accepted by `fit.fixed`.
pub fn parameter_names() -> Vec<&'static str> {
    Parameter::ALL.iter().map(|p| p.name()).collect()
}
