//! Parameter estimation from HOM coincidence data.
//!
//! The forward model is counts(τ) = amplitude·P_c(τ; Δω₋, κ₁, κ₂) + offset,
//! with P_c computed from the full cavity-filtered state. All five quantities
//! are searched by a bounded multi-start Nelder–Mead.

pub mod nelder_mead;
mod synthetic;

pub use nelder_mead::{minimize, NelderMeadOutcome, NelderMeadSettings};
pub use synthetic::{poisson_counts, simulate_counts};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::biphoton::{apply_delay, apply_filter, assemble_jsa_broadband, assemble_jsa_mono, Jsa, SpectralGrid};
use crate::cavity::CavitySpec;
use crate::error::{Error, Result};
use crate::hom::{coincidence_probabilities, coincidence_trace, feature_width};
use crate::spectral::{FilterSpec, PhaseMatchSpec, PumpMode, PumpSpec};
use crate::units::{wavelength_width_from_omega, SPEED_OF_LIGHT};

/// Fixed physics of the forward model. The phase-matching bandwidth and
/// spectral-phase coefficients in `phase_match` are overridden by the fit.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelContext {
    pub pump: PumpSpec,
    pub phase_match: PhaseMatchSpec,
    pub cavity: CavitySpec,
    pub grid: SpectralGrid,
    /// Delay-stage setting τ applied before the HOM scan.
    pub delay: f64,
    pub filter: Option<FilterSpec>,
}

impl ModelContext {
    /// State for the given phase-matching bandwidth and spectral phase.
    pub fn state(&self, bandwidth: f64, walkoff: f64, dispersion: f64) -> Result<Jsa> {
        let pm = PhaseMatchSpec { bandwidth, walkoff, dispersion, ..self.phase_match };
        pm.validate()?;
        let jsa = match self.pump.mode {
            PumpMode::Monochromatic => assemble_jsa_mono(&self.pump, &pm, &self.cavity, &self.grid)?,
            PumpMode::GaussianBroadband => assemble_jsa_broadband(&self.pump, &pm, &self.cavity, &self.grid)?,
        };
        let jsa = match &self.filter {
            Some(f) => apply_filter(&jsa, f)?,
            None => jsa,
        };
        Ok(if self.delay != 0.0 { apply_delay(&jsa, self.delay) } else { jsa })
    }

    /// Model counts at `delays` for a full parameter vector.
    pub fn counts(&self, theta: &[f64; 5], delays: &[f64]) -> Result<Vec<f64>> {
        let jsa = self.state(theta[0], theta[1], theta[2])?;
        let p = coincidence_probabilities(&jsa, delays)?;
        Ok(p.into_iter().map(|v| theta[3] * v + theta[4]).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parameter {
    /// Δω₋, intensity FWHM of the phase-matching function (rad/s).
    Bandwidth,
    /// κ₁ (s).
    Walkoff,
    /// κ₂ (s²).
    Dispersion,
    /// Counts per unit coincidence probability.
    Amplitude,
    /// Constant background (counts).
    Offset,
}

impl Parameter {
    pub const ALL: [Parameter; 5] =
        [Parameter::Bandwidth, Parameter::Walkoff, Parameter::Dispersion, Parameter::Amplitude, Parameter::Offset];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Parameter::Bandwidth => "bandwidth_rad_per_s",
            Parameter::Walkoff => "walkoff_s",
            Parameter::Dispersion => "dispersion_s2",
            Parameter::Amplitude => "amplitude",
            Parameter::Offset => "offset",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

impl Bounds {
    pub fn new(lower: f64, upper: f64) -> Self {
        Self { lower, upper }
    }

    pub fn fixed(value: f64) -> Self {
        Self { lower: value, upper: value }
    }

    pub fn is_fixed(&self) -> bool {
        self.lower == self.upper
    }

    fn width(self) -> f64 {
        self.upper - self.lower
    }

    fn unit_of(self, v: f64) -> f64 {
        if self.is_fixed() {
            0.0
        } else {
            ((v - self.lower) / self.width()).clamp(0.0, 1.0)
        }
    }

    fn at_unit(self, u: f64) -> f64 {
        self.lower + u * self.width()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitProblem {
    pub delays: Vec<f64>,
    pub counts: Vec<f64>,
    /// Initial guess, indexed by [`Parameter::index`].
    pub initial: [f64; 5],
    pub bounds: [Bounds; 5],
    pub context: ModelContext,
    /// Weight residuals by 1/max(counts, 1).
    pub poisson_weights: bool,
}

impl FitProblem {
    /// Problem with the default bounds: Δω₋ in [0.1, 10]× the guess, κ₁ within
    /// ±1 ps, κ₂ within ±1e-24 s², amplitude in [0, 10·max counts] and offset
    /// within ±max counts.
    pub fn new(delays: Vec<f64>, counts: Vec<f64>, initial: [f64; 5], context: ModelContext) -> Self {
        let peak = counts.iter().copied().fold(0.0_f64, f64::max).max(1e-300);
        let bounds = [
            Bounds::new(0.1 * initial[0], 10.0 * initial[0]),
            Bounds::new(-1e-12, 1e-12),
            Bounds::new(-1e-24, 1e-24),
            Bounds::new(0.0, 10.0 * peak),
            Bounds::new(-peak, peak),
        ];
        Self { delays, counts, initial, bounds, context, poisson_weights: false }
    }

    pub fn with_bounds(mut self, p: Parameter, bounds: Bounds) -> Self {
        self.bounds[p.index()] = bounds;
        self
    }

    pub fn fix(self, p: Parameter, value: f64) -> Self {
        let mut s = self.with_bounds(p, Bounds::fixed(value));
        s.initial[p.index()] = value;
        s
    }

    fn free(&self) -> Vec<usize> {
        (0..5).filter(|&i| !self.bounds[i].is_fixed()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.delays.len() != self.counts.len() {
            return Err(Error::InvalidArgument("delays and counts differ in length".into()));
        }
        let free = self.free().len();
        if self.counts.len() < 2 * free.max(1) {
            return Err(Error::InvalidArgument(format!(
                "{} data points for {free} free parameters; need at least twice as many",
                self.counts.len()
            )));
        }
        for (p, b) in Parameter::ALL.iter().zip(&self.bounds) {
            if !(b.lower.is_finite() && b.upper.is_finite() && b.lower <= b.upper) {
                return Err(Error::InvalidArgument(format!(
                    "bounds of {} must be finite and ordered, got [{}, {}]",
                    p.name(),
                    b.lower,
                    b.upper
                )));
            }
        }
        if !(self.bounds[0].lower > 0.0) {
            return Err(Error::InvalidArgument("bandwidth lower bound must be positive".into()));
        }
        if self.counts.iter().any(|c| !c.is_finite()) || self.delays.iter().any(|d| !d.is_finite()) {
            return Err(Error::InvalidArgument("data contain non-finite values".into()));
        }
        Ok(())
    }

    /// Weighted residual sum of squares at θ.
    pub fn residual(&self, theta: &[f64; 5]) -> f64 {
        match self.context.counts(theta, &self.delays) {
            Ok(model) => self
                .counts
                .iter()
                .zip(&model)
                .map(|(c, m)| {
                    let w = if self.poisson_weights { 1.0 / c.max(1.0) } else { 1.0 };
                    w * (c - m).powi(2)
                })
                .sum(),
            Err(_) => f64::INFINITY,
        }
    }

    fn theta_from_unit(&self, free: &[usize], u: &[f64]) -> [f64; 5] {
        let mut theta = self.bounds.map(|b| b.lower);
        for (k, &i) in free.iter().enumerate() {
            theta[i] = self.bounds[i].at_unit(u[k]);
        }
        theta
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitSettings {
    pub starts: usize,
    pub seed: u64,
    pub nelder_mead: NelderMeadSettings,
}

impl Default for FitSettings {
    fn default() -> Self {
        Self { starts: 8, seed: 0, nelder_mead: NelderMeadSettings::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterEstimate {
    pub value: f64,
    pub fixed: bool,
    pub at_lower_bound: bool,
    pub at_upper_bound: bool,
    /// Half-width from the curvature of the residual profile; `None` when the
    /// profile is flat or not convex.
    pub half_width: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub parameters: [ParameterEstimate; 5],
    pub residual: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// Index of the multi-start that produced the result.
    pub start: usize,
    pub history: Vec<f64>,
}

impl FitResult {
    pub fn value(&self, p: Parameter) -> f64 {
        self.parameters[p.index()].value
    }

    pub fn theta(&self) -> [f64; 5] {
        let mut t = [0.0; 5];
        for (v, e) in t.iter_mut().zip(&self.parameters) {
            *v = e.value;
        }
        t
    }
}

fn start_points(problem: &FitProblem, free: &[usize], settings: &FitSettings) -> Vec<Vec<f64>> {
    let guess: Vec<f64> = free.iter().map(|&i| problem.bounds[i].unit_of(problem.initial[i])).collect();
    let mut starts = vec![guess];
    for s in 1..settings.starts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(settings.seed.wrapping_add(s as u64));
        starts.push(free.iter().map(|_| rng.random::<f64>()).collect());
    }
    starts
}

fn half_widths(problem: &FitProblem, theta: &[f64; 5], residual: f64, free: &[usize]) -> [Option<f64>; 5] {
    let mut out = [None; 5];
    let dof = problem.counts.len().saturating_sub(free.len()).max(1) as f64;
    let s2 = residual / dof;
    for &i in free {
        let h = 1e-4 * problem.bounds[i].width();
        let mut up = *theta;
        let mut down = *theta;
        up[i] = (theta[i] + h).min(problem.bounds[i].upper);
        down[i] = (theta[i] - h).max(problem.bounds[i].lower);
        let (hu, hd) = (up[i] - theta[i], theta[i] - down[i]);
        if hu <= 0.0 || hd <= 0.0 {
            continue;
        }
        let (fu, fd) = (problem.residual(&up), problem.residual(&down));
        // second derivative on a possibly uneven stencil
        let curvature = 2.0 * (fu * hd + fd * hu - residual * (hu + hd)) / (hu * hd * (hu + hd));
        if curvature > 0.0 && curvature.is_finite() {
            out[i] = Some((2.0 * s2 / curvature).sqrt());
        }
    }
    out
}

/// Bounded multi-start least-squares fit of the HOM model to count data.
///
/// Start 0 is the initial guess; the others are drawn uniformly inside the
/// bounds from `settings.seed`. Ties in residual go to the lower start index.
pub fn fit_hom_trace(problem: &FitProblem, settings: &FitSettings) -> Result<FitResult> {
    problem.validate()?;
    let free = problem.free();
    let starts = start_points(problem, &free, settings);

    let outcomes: Vec<NelderMeadOutcome> = starts
        .par_iter()
        .map(|u0| {
            let objective = |u: &[f64]| problem.residual(&problem.theta_from_unit(&free, u));
            if free.is_empty() {
                let v = objective(&[]);
                NelderMeadOutcome {
                    point: Vec::new(),
                    value: v,
                    iterations: 0,
                    evaluations: 1,
                    converged: true,
                    simplex_size: 0.0,
                    history: vec![v],
                }
            } else {
                minimize(objective, u0, &settings.nelder_mead)
            }
        })
        .collect();

    let (start, best) = outcomes
        .iter()
        .enumerate()
        .fold(None::<(usize, &NelderMeadOutcome)>, |acc, (i, o)| match acc {
            Some((_, b)) if b.value <= o.value => acc,
            _ => Some((i, o)),
        })
        .ok_or_else(|| Error::InvalidArgument("no starts".into()))?;

    let theta = problem.theta_from_unit(&free, &best.point);
    let widths = half_widths(problem, &theta, best.value, &free);
    let mut parameters = [ParameterEstimate {
        value: 0.0,
        fixed: false,
        at_lower_bound: false,
        at_upper_bound: false,
        half_width: None,
    }; 5];
    for i in 0..5 {
        let b = problem.bounds[i];
        let edge = 1e-6 * b.width();
        parameters[i] = ParameterEstimate {
            value: theta[i],
            fixed: b.is_fixed(),
            at_lower_bound: !b.is_fixed() && theta[i] <= b.lower + edge,
            at_upper_bound: !b.is_fixed() && theta[i] >= b.upper - edge,
            half_width: widths[i],
        };
    }
    let result = FitResult {
        parameters,
        residual: best.value,
        iterations: best.iterations,
        evaluations: outcomes.iter().map(|o| o.evaluations).sum(),
        converged: best.converged,
        start,
        history: best.history.clone(),
    };
    if !outcomes.iter().any(|o| o.converged) {
        return Err(Error::NonConvergence { best: Box::new(result) });
    }
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandwidthReport {
    pub delta_omega_minus: f64,
    /// Δω₋/2π (Hz).
    pub delta_nu_minus: f64,
    pub center_wavelength: f64,
    /// Signal/idler wavelength bandwidth λ²·Δω₋/(2πc) (m).
    pub delta_lambda_si: f64,
}

/// Converts a bandwidth (rad/s) into the signal/idler wavelength bandwidth
/// around `center_wavelength` (m).
pub fn bandwidth_report(delta_omega_minus: f64, center_wavelength: f64) -> BandwidthReport {
    BandwidthReport {
        delta_omega_minus,
        delta_nu_minus: delta_omega_minus / std::f64::consts::TAU,
        center_wavelength,
        delta_lambda_si: wavelength_width_from_omega(delta_omega_minus, center_wavelength),
    }
}

/// [`bandwidth_report`] of a converged fit.
pub fn extract_bandwidth_report(result: &FitResult, center_wavelength: f64) -> Result<BandwidthReport> {
    if !result.converged {
        return Err(Error::InvalidArgument("bandwidth report needs a converged fit".into()));
    }
    if !(center_wavelength > 0.0) {
        return Err(Error::InvalidArgument("centre wavelength must be positive".into()));
    }
    Ok(bandwidth_report(result.value(Parameter::Bandwidth), center_wavelength))
}

/// Wavelength of the degeneracy frequency of `pm` (m).
pub fn degeneracy_wavelength(pm: &PhaseMatchSpec) -> f64 {
    std::f64::consts::TAU * SPEED_OF_LIGHT / pm.degeneracy
}

/// Observables of a measured HOM dip that the spectral phase is tuned to reproduce.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipTargets {
    pub visibility: f64,
    /// Dip FWHM (s).
    pub width: f64,
    /// Signed visibility after the half round-trip delay stage (positive for
    /// a dip), when known.
    pub delayed_visibility: Option<f64>,
    /// Same for the anti-resonant partner state, pumped one FSR higher.
    pub anti_delayed_visibility: Option<f64>,
}

/// Dip visibility and FWHM of the undelayed state plus the optional signed
/// delayed-state visibilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipObservables {
    pub visibility: f64,
    pub width: f64,
    pub delayed_visibility: Option<f64>,
    pub anti_delayed_visibility: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseCalibration {
    pub walkoff: f64,
    pub dispersion: f64,
    pub observables: DipObservables,
    pub objective: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationSettings {
    pub walkoff: Bounds,
    pub dispersion: Bounds,
    /// Coarse scan points per axis before the simplex refinement.
    pub scan: usize,
    pub nelder_mead: NelderMeadSettings,
}

impl Default for CalibrationSettings {
    fn default() -> Self {
        Self {
            walkoff: Bounds::new(0.0, 2e-13),
            dispersion: Bounds::new(0.0, 1e-26),
            scan: 5,
            nelder_mead: NelderMeadSettings { simplex_tolerance: 1e-4, max_iterations: 200, initial_step: 0.1 },
        }
    }
}

/// Which delayed-state visibilities to evaluate alongside the dip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DelayedStates {
    pub resonant: bool,
    pub anti_resonant: bool,
}

fn delayed_state_visibility(context: &ModelContext, walkoff: f64, dispersion: f64, delays: &[f64]) -> Result<f64> {
    let jsa = context.state(context.phase_match.bandwidth, walkoff, dispersion)?;
    Ok(coincidence_trace(&apply_delay(&jsa, context.cavity.half_round_trip()), delays)?.visibility())
}

/// Observables for one (κ₁, κ₂) pair. The anti-resonant partner is `context`
/// with the pump moved up by one FSR.
pub fn dip_observables(
    context: &ModelContext,
    walkoff: f64,
    dispersion: f64,
    delays: &[f64],
    delayed: DelayedStates,
) -> Result<DipObservables> {
    let jsa = context.state(context.phase_match.bandwidth, walkoff, dispersion)?;
    let trace = coincidence_trace(&jsa, delays)?;
    let width = feature_width(&trace)?;
    let delayed_visibility = if delayed.resonant {
        Some(coincidence_trace(&apply_delay(&jsa, context.cavity.half_round_trip()), delays)?.visibility())
    } else {
        None
    };
    let anti_delayed_visibility = if delayed.anti_resonant {
        let mut partner = context.clone();
        partner.pump.center += context.cavity.fsr;
        Some(delayed_state_visibility(&partner, walkoff, dispersion, delays)?)
    } else {
        None
    };
    Ok(DipObservables { visibility: trace.visibility(), width, delayed_visibility, anti_delayed_visibility })
}

fn relative_error_sqr(value: Option<f64>, target: Option<f64>) -> f64 {
    match (value, target) {
        (Some(v), Some(t)) => ((v - t) / t).powi(2),
        _ => 0.0,
    }
}

/// Finds (κ₁, κ₂) whose dip reproduces `targets`, minimising the summed squared
/// relative deviations. `context.delay` is ignored.
pub fn calibrate_phase(
    context: &ModelContext,
    targets: &DipTargets,
    delays: &[f64],
    settings: &CalibrationSettings,
) -> Result<PhaseCalibration> {
    let mut context = context.clone();
    context.delay = 0.0;
    let context = &context;
    let delayed = DelayedStates {
        resonant: targets.delayed_visibility.is_some(),
        anti_resonant: targets.anti_delayed_visibility.is_some(),
    };
    let objective = |u: &[f64]| -> f64 {
        let k1 = settings.walkoff.at_unit(u[0]);
        let k2 = settings.dispersion.at_unit(u[1]);
        match dip_observables(context, k1, k2, delays, delayed) {
            Ok(o) => {
                ((o.visibility - targets.visibility) / targets.visibility).powi(2)
                    + ((o.width - targets.width) / targets.width).powi(2)
                    + relative_error_sqr(o.delayed_visibility, targets.delayed_visibility)
                    + relative_error_sqr(o.anti_delayed_visibility, targets.anti_delayed_visibility)
            }
            Err(_) => f64::INFINITY,
        }
    };
    let n = settings.scan.max(2);
    let grid: Vec<[f64; 2]> = (0..n)
        .flat_map(|i| (0..n).map(move |j| [i as f64 / (n - 1) as f64, j as f64 / (n - 1) as f64]))
        .collect();
    let scanned: Vec<f64> = grid.par_iter().map(|u| objective(u)).collect();
    let (best, _) = scanned
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    let out = minimize(objective, &grid[best], &settings.nelder_mead);
    if !out.value.is_finite() {
        return Err(Error::InvalidArgument("no (walk-off, dispersion) pair produced a resolvable dip".into()));
    }
    let walkoff = settings.walkoff.at_unit(out.point[0]);
    let dispersion = settings.dispersion.at_unit(out.point[1]);
    let observables = dip_observables(context, walkoff, dispersion, delays, delayed)?;
    Ok(PhaseCalibration { walkoff, dispersion, observables, objective: out.value, converged: out.converged })
}
