//! Hong-Ou-Mandel interference of the pair at a balanced beam splitter.
//!
//! The coincidence probability at relative delay τ is
//! P_c(τ) = ½ − ½·Re[Σ C(ω₋)·C*(−ω₋)·e^{−iω₋τ}] / Σ|C|²,
//! summed over ω₊ rows for 2D states.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::biphoton::{apply_delay, Jsa};
use crate::error::{Error, Result};

/// Minimum number of baseline samples accepted by [`visibility`].
pub const MIN_BASELINE_SAMPLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    /// Bunching: coincidences drop below the baseline.
    Dip,
    /// Anti-bunching: coincidences rise above the baseline.
    Peak,
}

impl ExtremumKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExtremumKind::Dip => "dip",
            ExtremumKind::Peak => "peak",
        }
    }
}

/// Delays at distance in [inner, outer] from `center` form the baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineWindow {
    pub center: f64,
    pub inner: f64,
    pub outer: f64,
}

impl BaselineWindow {
    pub fn contains(&self, tau: f64) -> bool {
        let d = (tau - self.center).abs();
        d >= self.inner && d <= self.outer
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomTrace {
    pub delays: Vec<f64>,
    pub coincidence: Vec<f64>,
    /// N_τ: mean coincidence probability over the baseline window.
    pub baseline: f64,
    /// N_0: coincidence probability at the feature extremum.
    pub extremum: f64,
    pub extremum_delay: f64,
    pub extremum_kind: ExtremumKind,
    pub window: BaselineWindow,
    /// Set when baseline samples sit inside the feature (above half depth).
    pub window_overlaps_feature: bool,
}

impl HomTrace {
    /// Coincidences divided by the baseline level.
    pub fn normalized(&self) -> Vec<f64> {
        self.coincidence.iter().map(|p| p / self.baseline).collect()
    }

    pub fn visibility(&self) -> f64 {
        (self.baseline - self.extremum) / self.baseline
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Visibility {
    pub value: f64,
    pub baseline: f64,
    pub extremum: f64,
    pub extremum_delay: f64,
    pub kind: ExtremumKind,
    pub window_overlaps_feature: bool,
}

/// Closed-form trace of the Gaussian state C = exp(−ω₋²/(2σ²)) without cavity.
pub fn gaussian_oracle(sigma: f64, tau: f64) -> f64 {
    0.5 * (1.0 - (-sigma * sigma * tau * tau / 4.0).exp())
}

/// FWHM of the Gaussian oracle dip, 4√(ln2)/σ.
pub fn gaussian_oracle_fwhm(sigma: f64) -> f64 {
    4.0 * std::f64::consts::LN_2.sqrt() / sigma
}

/// Exchange correlation g(ω₋) = Σ_rows C(ω₋)C*(−ω₋) for ω₋ ≥ 0, with the norm.
struct ExchangeCorrelation {
    /// g at ω₋ = 0, then at successive positive samples.
    half: Vec<Complex64>,
    step: f64,
    norm: f64,
}

impl ExchangeCorrelation {
    fn new(jsa: &Jsa) -> Result<Self> {
        let axis = jsa.grid.minus;
        if !axis.is_symmetric() {
            return Err(Error::AsymmetricGrid);
        }
        let n = axis.points;
        let mid = n / 2;
        let mut half = vec![Complex64::new(0.0, 0.0); n - mid];
        let mut norm = 0.0;
        for row in jsa.rows() {
            for (j, g) in half.iter_mut().enumerate() {
                *g += row[mid + j] * row[mid - j].conj();
            }
            norm += row.iter().map(|c| c.norm_sqr()).sum::<f64>();
        }
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::DegenerateState);
        }
        Ok(Self { half, step: axis.step(), norm })
    }

    /// Re Σ g(ω)e^{−iωτ} / norm, using g(−ω) = g(ω)*.
    fn overlap_at(&self, tau: f64) -> f64 {
        const RESYNC: usize = 512;
        let theta = -self.step * tau;
        let w = Complex64::from_polar(1.0, theta);
        let mut acc = 0.0;
        let mut p = Complex64::new(1.0, 0.0);
        for (j, g) in self.half.iter().enumerate().skip(1) {
            if j % RESYNC == 0 {
                p = Complex64::from_polar(1.0, theta * j as f64);
            } else {
                p *= w;
            }
            acc += g.re * p.re - g.im * p.im;
        }
        (self.half[0].re + 2.0 * acc) / self.norm
    }
}

/// Coincidence probability at every requested delay, annotated with the
/// default baseline window.
pub fn coincidence_trace(jsa: &Jsa, delays: &[f64]) -> Result<HomTrace> {
    let coincidence = coincidence_probabilities(jsa, delays)?;
    annotate(delays.to_vec(), coincidence)
}

/// Bare P_c(τ) samples, without baseline or extremum analysis.
pub fn coincidence_probabilities(jsa: &Jsa, delays: &[f64]) -> Result<Vec<f64>> {
    let corr = ExchangeCorrelation::new(jsa)?;
    Ok(delays
        .par_iter()
        .map(|&tau| (0.5 - 0.5 * corr.overlap_at(tau)).clamp(0.0, 1.0))
        .collect())
}

/// Delay stage followed by the HOM scan.
pub fn trace_for_delayed_state(jsa: &Jsa, tau: f64, delays: &[f64]) -> Result<HomTrace> {
    coincidence_trace(&apply_delay(jsa, tau), delays)
}

/// Builds a trace from raw samples (e.g. measured data) and annotates it.
pub fn trace_from_samples(delays: Vec<f64>, coincidence: Vec<f64>) -> Result<HomTrace> {
    if delays.len() != coincidence.len() {
        return Err(Error::InvalidArgument("delays and coincidences differ in length".into()));
    }
    if delays.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("delays must be strictly increasing".into()));
    }
    annotate(delays, coincidence)
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if !n.is_multiple_of(2) {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Rough feature centre and FWHM, using the median as a provisional baseline.
fn rough_feature(delays: &[f64], p: &[f64]) -> (usize, f64) {
    let base = median(p);
    let (i, _) = p
        .iter()
        .enumerate()
        .map(|(i, v)| (i, (v - base).abs()))
        .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    let depth = p[i] - base;
    let inside = |v: f64| (v - base) * depth.signum() > 0.5 * depth.abs();
    let mut lo = i;
    while lo > 0 && inside(p[lo - 1]) {
        lo -= 1;
    }
    let mut hi = i;
    while hi + 1 < p.len() && inside(p[hi + 1]) {
        hi += 1;
    }
    let lo_t = if lo > 0 { 0.5 * (delays[lo] + delays[lo - 1]) } else { delays[0] };
    let hi_t = if hi + 1 < p.len() { 0.5 * (delays[hi] + delays[hi + 1]) } else { delays[p.len() - 1] };
    let width = (hi_t - lo_t).max(delays.get(1).map_or(0.0, |d| d - delays[0]));
    (i, width)
}

/// Baseline window at 3–5 feature widths from the feature centre, clipped to
/// the trace and widened until it holds enough samples.
pub fn default_window(delays: &[f64], coincidence: &[f64]) -> BaselineWindow {
    let (i, width) = rough_feature(delays, coincidence);
    let center = delays[i];
    let reach = (center - delays[0]).max(delays[delays.len() - 1] - center);
    let mut window = BaselineWindow { center, inner: 3.0 * width, outer: (5.0 * width).min(reach) };
    let count = |w: &BaselineWindow| delays.iter().filter(|&&t| w.contains(t)).count();
    if count(&window) < MIN_BASELINE_SAMPLES {
        window.outer = reach;
    }
    while count(&window) < MIN_BASELINE_SAMPLES && window.inner > 0.0 {
        window.inner *= 0.8;
        if window.inner < 1e-3 * width {
            window.inner = 0.0;
        }
    }
    window
}

fn annotate(delays: Vec<f64>, coincidence: Vec<f64>) -> Result<HomTrace> {
    if delays.len() < MIN_BASELINE_SAMPLES + 1 {
        return Err(Error::InvalidArgument(format!(
            "a trace needs more than {MIN_BASELINE_SAMPLES} delays, got {}",
            delays.len()
        )));
    }
    let window = default_window(&delays, &coincidence);
    let v = measure(&delays, &coincidence, &window)?;
    Ok(HomTrace {
        delays,
        coincidence,
        baseline: v.baseline,
        extremum: v.extremum,
        extremum_delay: v.extremum_delay,
        extremum_kind: v.kind,
        window,
        window_overlaps_feature: v.window_overlaps_feature,
    })
}

fn measure(delays: &[f64], p: &[f64], window: &BaselineWindow) -> Result<Visibility> {
    let base: Vec<f64> = delays
        .iter()
        .zip(p)
        .filter(|(t, _)| window.contains(**t))
        .map(|(_, v)| *v)
        .collect();
    if base.len() < MIN_BASELINE_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "baseline window holds {} samples, need at least {MIN_BASELINE_SAMPLES}",
            base.len()
        )));
    }
    let baseline = base.iter().sum::<f64>() / base.len() as f64;
    if baseline == 0.0 {
        return Err(Error::UndefinedVisibility);
    }
    let mut lo = (f64::INFINITY, 0.0);
    let mut hi = (f64::NEG_INFINITY, 0.0);
    for (&t, &v) in delays.iter().zip(p) {
        if (t - window.center).abs() < window.inner || window.inner == 0.0 {
            if v < lo.0 {
                lo = (v, t);
            }
            if v > hi.0 {
                hi = (v, t);
            }
        }
    }
    if !lo.0.is_finite() {
        return Err(Error::InvalidArgument("no samples inside the feature region".into()));
    }
    let (kind, (extremum, extremum_delay)) =
        if baseline - lo.0 >= hi.0 - baseline { (ExtremumKind::Dip, lo) } else { (ExtremumKind::Peak, hi) };
    let half = 0.5 * (extremum - baseline).abs();
    let window_overlaps_feature = base.iter().any(|v| (v - baseline).abs() > half && half > 0.0);
    Ok(Visibility {
        value: (baseline - extremum) / baseline,
        baseline,
        extremum,
        extremum_delay,
        kind,
        window_overlaps_feature,
    })
}

/// (N_τ − N_0)/N_τ with N_τ averaged over `window`; positive for dips,
/// negative for peaks.
pub fn visibility(trace: &HomTrace, window: &BaselineWindow) -> Result<Visibility> {
    measure(&trace.delays, &trace.coincidence, window)
}

/// FWHM of the annotated feature, measured at (N_τ + N_0)/2 with linear
/// interpolation between samples.
pub fn feature_width(trace: &HomTrace) -> Result<f64> {
    let p = &trace.coincidence;
    let t = &trace.delays;
    let half = 0.5 * (trace.baseline + trace.extremum);
    let sign = match trace.extremum_kind {
        ExtremumKind::Dip => 1.0,
        ExtremumKind::Peak => -1.0,
    };
    // inside(v) ⇔ v is deeper than the half level
    let inside = |v: f64| sign * (half - v) > 0.0;
    let i = t
        .iter()
        .position(|&d| d == trace.extremum_delay)
        .ok_or_else(|| Error::InvalidArgument("extremum delay not in trace".into()))?;
    if !inside(p[i]) {
        return Err(Error::FeatureUnresolved { samples: 0 });
    }
    let mut lo = i;
    while lo > 0 && inside(p[lo - 1]) {
        lo -= 1;
    }
    let mut hi = i;
    while hi + 1 < p.len() && inside(p[hi + 1]) {
        hi += 1;
    }
    if lo == 0 || hi + 1 == p.len() {
        return Err(Error::InvalidArgument("feature does not return to half depth within the trace".into()));
    }
    let samples = hi - lo + 1;
    if samples < 5 {
        return Err(Error::FeatureUnresolved { samples });
    }
    let cross = |a: usize, b: usize| t[a] + (half - p[a]) * (t[b] - t[a]) / (p[b] - p[a]);
    Ok(cross(hi, hi + 1) - cross(lo - 1, lo))
}

/// Uniform delay samples over [start, stop].
pub fn linspace(start: f64, stop: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        n => {
            let step = (stop - start) / (n - 1) as f64;
            (0..n).map(|k| start + k as f64 * step).collect()
        }
    }
}
