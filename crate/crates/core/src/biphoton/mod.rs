//! Joint spectral amplitude of the pair: assembly from the spectral and cavity
//! factors, the delay and filter stages, and exchange-symmetry diagnostics.
//!
//! Coordinates are ω₊ = ω_s + ω_i and ω₋ = ω_s − ω_i. Exchanging the photons
//! maps ω₋ → −ω₋ at fixed ω₊, which on a zero-centred odd grid is the exact
//! index reflection `k → n − 1 − k`.

mod grid;
mod lattice;

pub use grid::{Axis, SpectralGrid};
pub use lattice::{jsi_autocorrelation, locate_peak_near, Autocorrelation};

use num_complex::Complex64;

use crate::cavity::{self, classify_pump, CavitySpec, PumpClass};
use crate::error::{Error, Result};
use crate::spectral::{
    eval_filter, eval_phase_match, eval_pump, FilterSpec, PhaseMatchSpec, PumpMode, PumpSpec,
};

/// Record of one multiplicative factor applied to a [`Jsa`].
#[derive(Debug, Clone, PartialEq)]
pub enum Factor {
    Pump(PumpSpec),
    PhaseMatch(PhaseMatchSpec),
    Cavity(CavitySpec),
    Delay(f64),
    Filter(FilterSpec),
}

/// Sampled joint spectral amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct Jsa {
    pub grid: SpectralGrid,
    /// Row-major, one row per ω₊ sample (a single row for 1D states).
    pub amplitudes: Vec<Complex64>,
    pub factors: Vec<Factor>,
    /// Pump centre frequency; the fixed ω₊ of 1D states.
    pub pump_frequency: f64,
}

impl Jsa {
    /// Σ|C|²·cell.
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.cell()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Complex64]> {
        self.amplitudes.chunks(self.grid.cols())
    }

    /// ω₊ of row `r`.
    pub fn omega_plus(&self, r: usize) -> f64 {
        self.grid.plus.map_or(self.pump_frequency, |a| a.coordinate(r))
    }

    fn map_pointwise(&self, factor: Factor, f: impl Fn(f64, f64) -> Complex64) -> Jsa {
        let cols = self.grid.cols();
        let minus = self.grid.minus.coordinates();
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, c)| c * f(self.omega_plus(i / cols), minus[i % cols]))
            .collect();
        let mut factors = self.factors.clone();
        factors.push(factor);
        Jsa { grid: self.grid, amplitudes, factors, pump_frequency: self.pump_frequency }
    }
}

/// Rejects grids whose steps do not resolve the narrowest cavity linewidth
/// (step ≤ linewidth/8).
pub fn check_resolution(grid: &SpectralGrid, cav: &CavitySpec) -> Result<()> {
    if let Some(lw) = cavity::narrowest_linewidth(cav) {
        let required = lw / 8.0;
        let step = grid.coarsest_step();
        if step > required {
            return Err(Error::Resolution { step, required });
        }
    }
    Ok(())
}

fn finish(grid: SpectralGrid, amplitudes: Vec<Complex64>, factors: Vec<Factor>, pump: f64) -> Result<Jsa> {
    let jsa = Jsa { grid, amplitudes, factors, pump_frequency: pump };
    let norm = jsa.norm_sqr();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::DegenerateState);
    }
    Ok(jsa)
}

/// JSA of a monochromatic pump: C(ω₋) = C_PM(ω_p, ω₋)·T_s((ω_p+ω₋)/2)·T_i((ω_p−ω₋)/2).
pub fn assemble_jsa_mono(
    pump: &PumpSpec,
    pm: &PhaseMatchSpec,
    cav: &CavitySpec,
    grid: &SpectralGrid,
) -> Result<Jsa> {
    if pump.mode != PumpMode::Monochromatic {
        return Err(Error::InvalidArgument("assemble_jsa_mono needs a monochromatic pump".into()));
    }
    if grid.is_2d() {
        return Err(Error::InvalidArgument("assemble_jsa_mono needs a 1D grid in omega_minus".into()));
    }
    check_resolution(grid, cav)?;
    let wp = pump.center;
    let amplitudes = grid
        .minus
        .coordinates()
        .into_iter()
        .map(|wm| eval_phase_match(pm, wp, wm) * cavity::cavity_factor_with_medium(cav, pm, wp, wm))
        .collect();
    finish(
        *grid,
        amplitudes,
        vec![Factor::Pump(*pump), Factor::PhaseMatch(*pm), Factor::Cavity(*cav)],
        wp,
    )
}

/// JSA of a broadband Gaussian pump on a 2D (ω₊, ω₋) grid:
/// C = C_p(ω₊)·C_PM(ω₋)·C_cav(ω₊, ω₋).
pub fn assemble_jsa_broadband(
    pump: &PumpSpec,
    pm: &PhaseMatchSpec,
    cav: &CavitySpec,
    grid: &SpectralGrid,
) -> Result<Jsa> {
    if pump.mode != PumpMode::GaussianBroadband {
        return Err(Error::InvalidArgument("assemble_jsa_broadband needs a broadband pump".into()));
    }
    let plus = grid
        .plus
        .ok_or_else(|| Error::InvalidArgument("assemble_jsa_broadband needs a 2D grid".into()))?;
    check_resolution(grid, cav)?;
    let minus = grid.minus.coordinates();
    let pm_row: Vec<Complex64> = minus.iter().map(|&wm| eval_phase_match(pm, pump.center, wm)).collect();
    let mut amplitudes = Vec::with_capacity(grid.len());
    for wp in plus.coordinates() {
        let cp = eval_pump(pump, wp)?;
        amplitudes.extend(
            minus
                .iter()
                .zip(&pm_row)
                .map(|(&wm, &c)| cp * c * cavity::cavity_factor_with_medium(cav, pm, wp, wm)),
        );
    }
    finish(
        *grid,
        amplitudes,
        vec![Factor::Pump(*pump), Factor::PhaseMatch(*pm), Factor::Cavity(*cav)],
        pump.center,
    )
}

/// Relative delay τ between the photons: multiplies by exp(iτω₋/2).
pub fn apply_delay(jsa: &Jsa, tau: f64) -> Jsa {
    jsa.map_pointwise(Factor::Delay(tau), |_, wm| Complex64::from_polar(1.0, 0.5 * tau * wm))
}

/// Same filter on both photons: multiplies by F(ω_s)·F(ω_i).
pub fn apply_filter(jsa: &Jsa, filter: &FilterSpec) -> Result<Jsa> {
    let out = jsa.map_pointwise(Factor::Filter(*filter), |wp, wm| {
        let f = eval_filter(filter, 0.5 * (wp + wm)) * eval_filter(filter, 0.5 * (wp - wm));
        Complex64::new(f, 0.0)
    });
    let before = jsa.norm_sqr();
    let after = out.norm_sqr();
    if !(after >= 1e-12 * before) {
        return Err(Error::OverFiltered { before, after });
    }
    Ok(out)
}

/// S = Σ C(ω₊, ω₋)·C*(ω₊, −ω₋) / Σ|C|².
///
/// Equals +1 for states symmetric under photon exchange and −1 for
/// anti-symmetric ones.
pub fn exchange_overlap(jsa: &Jsa) -> Result<Complex64> {
    if !jsa.grid.minus.is_symmetric() {
        return Err(Error::AsymmetricGrid);
    }
    let mut overlap = Complex64::new(0.0, 0.0);
    let mut norm = 0.0;
    for row in jsa.rows() {
        for (a, b) in row.iter().zip(row.iter().rev()) {
            overlap += a * b.conj();
            norm += a.norm_sqr();
        }
    }
    if !(norm > 0.0) {
        return Err(Error::DegenerateState);
    }
    Ok(overlap / norm)
}

/// Joint spectral intensity |C|², same layout as the amplitudes.
pub fn jsi(jsa: &Jsa) -> Vec<f64> {
    jsa.amplitudes.iter().map(|c| c.norm_sqr()).collect()
}

/// JSI integrated over ω₊ (one value per ω₋ sample).
pub fn marginal_minus(jsa: &Jsa) -> Vec<f64> {
    let w = jsa.grid.plus.map_or(1.0, |a| a.step());
    let mut out = vec![0.0; jsa.grid.cols()];
    for row in jsa.rows() {
        for (o, c) in out.iter_mut().zip(row) {
            *o += c.norm_sqr() * w;
        }
    }
    out
}

/// JSI integrated over ω₋ (one value per ω₊ sample).
pub fn marginal_plus(jsa: &Jsa) -> Vec<f64> {
    let step = jsa.grid.minus.step();
    jsa.rows().map(|row| row.iter().map(|c| c.norm_sqr()).sum::<f64>() * step).collect()
}

/// Number of strict local maxima above `threshold_fraction`·max.
pub fn count_comb_peaks(jsi_1d: &[f64], threshold_fraction: f64) -> Result<usize> {
    if !(threshold_fraction > 0.0 && threshold_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold fraction must lie in (0, 1), got {threshold_fraction}"
        )));
    }
    if jsi_1d.is_empty() {
        return Err(Error::FlatInput("empty intensity array"));
    }
    let max = jsi_1d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = jsi_1d.iter().copied().fold(f64::INFINITY, f64::min);
    if !(max > min) {
        return Err(Error::FlatInput("intensity is constant"));
    }
    let level = threshold_fraction * max;
    Ok(jsi_1d
        .windows(3)
        .filter(|w| w[1] > w[0] && w[1] > w[2] && w[1] > level)
        .count())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetryLabel {
    Symmetric,
    AntiSymmetric,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryThresholds {
    pub symmetric: f64,
    pub antisymmetric: f64,
    /// Pump classification tolerance as a fraction of the FSR.
    pub pump_tolerance: f64,
}

impl Default for SymmetryThresholds {
    fn default() -> Self {
        Self { symmetric: 0.9, antisymmetric: -0.9, pump_tolerance: 0.01 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryReport {
    pub exchange_overlap: Complex64,
    pub label: SymmetryLabel,
    pub pump_class: PumpClass,
}

pub fn symmetry_report(jsa: &Jsa, cav: &CavitySpec, thresholds: SymmetryThresholds) -> Result<SymmetryReport> {
    let s = exchange_overlap(jsa)?;
    let label = if s.re >= thresholds.symmetric {
        SymmetryLabel::Symmetric
    } else if s.re <= thresholds.antisymmetric {
        SymmetryLabel::AntiSymmetric
    } else {
        SymmetryLabel::Mixed
    };
    let pump_class = classify_pump(cav, jsa.pump_frequency, thresholds.pump_tolerance * cav.fsr)?;
    Ok(SymmetryReport { exchange_overlap: s, label, pump_class })
}
