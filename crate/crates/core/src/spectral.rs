//! Closed-form spectral factors of the down-converted state: pump profile,
//! phase-matching function and optional bandpass filters.
//!
//! All widths are intensity (|·|²) FWHM in rad/s.

use std::f64::consts::LN_2;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Root of sinc²(x) = 1/2, with sinc(x) = sin(x)/x.
pub const SINC_HALF_POWER_ROOT: f64 = 1.391_557_378_251_510_3;

/// Which photon of the pair a per-photon quantity refers to. The signal photon
/// travels in path `a`, the idler in path `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Photon {
    Signal,
    Idler,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PumpMode {
    /// Linewidth much smaller than the cavity FSR: the pump factor is a delta
    /// in ω₊ and the state lives on a 1D grid in ω₋.
    Monochromatic,
    GaussianBroadband,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpSpec {
    pub center: f64,
    pub mode: PumpMode,
    /// Intensity FWHM; ignored for monochromatic pumps.
    pub linewidth: f64,
}

impl PumpSpec {
    pub fn monochromatic(center: f64) -> Result<Self> {
        let spec = Self { center, mode: PumpMode::Monochromatic, linewidth: 0.0 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn gaussian(center: f64, linewidth: f64) -> Result<Self> {
        let spec = Self { center, mode: PumpMode::GaussianBroadband, linewidth };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.center.is_finite() && self.center > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "pump centre frequency must be positive, got {}",
                self.center
            )));
        }
        if !(self.linewidth.is_finite() && self.linewidth >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "pump linewidth must be non-negative, got {}",
                self.linewidth
            )));
        }
        if self.mode == PumpMode::GaussianBroadband && self.linewidth == 0.0 {
            return Err(Error::InvalidArgument(
                "a broadband pump needs a positive linewidth".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseMatchShape {
    Sinc,
    Gaussian,
}

/// Phase-matching function of the nonlinear medium, expressed in ω₋.
///
/// `walkoff` (s) is the residual group-delay mismatch between signal and idler
/// for one pass through the medium; `dispersion` (s²) is the quadratic
/// spectral-phase coefficient of the pair in ω₋.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseMatchSpec {
    pub degeneracy: f64,
    pub bandwidth: f64,
    pub walkoff: f64,
    pub dispersion: f64,
    pub shape: PhaseMatchShape,
}

impl PhaseMatchSpec {
    pub fn new(degeneracy: f64, bandwidth: f64, shape: PhaseMatchShape) -> Result<Self> {
        let spec = Self { degeneracy, bandwidth, walkoff: 0.0, dispersion: 0.0, shape };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_phase(mut self, walkoff: f64, dispersion: f64) -> Self {
        self.walkoff = walkoff;
        self.dispersion = dispersion;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth.is_finite() && self.bandwidth > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "phase-matching bandwidth must be positive, got {}",
                self.bandwidth
            )));
        }
        if !(self.degeneracy.is_finite() && self.degeneracy > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "degeneracy frequency must be positive, got {}",
                self.degeneracy
            )));
        }
        if !self.walkoff.is_finite() || !self.dispersion.is_finite() {
            return Err(Error::InvalidArgument("spectral phase coefficients must be finite".into()));
        }
        Ok(())
    }

    /// Pair spectral phase κ₁ω₋/2 + κ₂ω₋²/2.
    pub fn spectral_phase(&self, omega_minus: f64) -> f64 {
        0.5 * omega_minus * (self.walkoff + self.dispersion * omega_minus)
    }

    /// Single-pass phase picked up by one photon detuned by `delta` from
    /// degeneracy. Signal and idler at δ = ±ω₋/2 add up to [`Self::spectral_phase`].
    pub fn photon_phase(&self, photon: Photon, delta: f64) -> f64 {
        let walk = match photon {
            Photon::Signal => 0.5 * self.walkoff,
            Photon::Idler => -0.5 * self.walkoff,
        };
        delta * (walk + self.dispersion * delta)
    }

    /// Real amplitude envelope with unit peak.
    pub fn envelope(&self, omega_minus: f64) -> f64 {
        match self.shape {
            PhaseMatchShape::Sinc => {
                let x = 2.0 * SINC_HALF_POWER_ROOT * omega_minus / self.bandwidth;
                sinc(x)
            }
            PhaseMatchShape::Gaussian => {
                let r = omega_minus / self.bandwidth;
                (-2.0 * LN_2 * r * r).exp()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterShape {
    Gaussian,
    TopHat,
}

/// Bandpass filter acting identically on both photons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    pub center: f64,
    pub bandwidth: f64,
    pub shape: FilterShape,
}

impl FilterSpec {
    pub fn new(center: f64, bandwidth: f64, shape: FilterShape) -> Result<Self> {
        let spec = Self { center, bandwidth, shape };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth.is_finite() && self.bandwidth > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "filter bandwidth must be positive, got {}",
                self.bandwidth
            )));
        }
        if !self.center.is_finite() {
            return Err(Error::InvalidArgument("filter centre must be finite".into()));
        }
        Ok(())
    }
}

pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Gaussian pump amplitude with unit peak and intensity FWHM `spec.linewidth`.
pub fn eval_pump(spec: &PumpSpec, omega_plus: f64) -> Result<Complex64> {
    match spec.mode {
        PumpMode::Monochromatic => Err(Error::DeltaPump),
        PumpMode::GaussianBroadband => {
            let d = omega_plus - spec.center;
            let amp = (-d * d * 2.0 * LN_2 / (spec.linewidth * spec.linewidth)).exp();
            Ok(Complex64::new(amp, 0.0))
        }
    }
}

/// Phase-matching amplitude A(ω₋)·exp(iφ(ω₋)).
///
/// The ω₊ dependence is neglected over the simulated window; the argument is
/// kept so call sites read like the two-variable factorisation.
pub fn eval_phase_match(spec: &PhaseMatchSpec, _omega_plus: f64, omega_minus: f64) -> Complex64 {
    Complex64::from_polar(spec.envelope(omega_minus), spec.spectral_phase(omega_minus))
}

/// Real filter amplitude in [0, 1].
pub fn eval_filter(spec: &FilterSpec, omega: f64) -> f64 {
    let d = omega - spec.center;
    match spec.shape {
        FilterShape::TopHat => {
            if d.abs() <= 0.5 * spec.bandwidth {
                1.0
            } else {
                0.0
            }
        }
        FilterShape::Gaussian => (-2.0 * LN_2 * d * d / (spec.bandwidth * spec.bandwidth)).exp(),
    }
}
