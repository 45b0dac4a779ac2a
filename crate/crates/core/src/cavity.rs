//! Fabry-Perot cavity around the nonlinear medium.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{PhaseMatchSpec, Photon};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavitySpec {
    /// Free spectral range ω̄ (rad/s).
    pub fsr: f64,
    pub reflectivity_signal: f64,
    pub reflectivity_idler: f64,
    /// Position of one resonance relative to ω = 0 (rad/s).
    pub resonance_offset: f64,
    /// When set, the walk-off and dispersion of the medium also act on every
    /// intracavity round trip (the medium fills the resonator, as for a
    /// waveguide with reflective facets).
    pub medium_inside: bool,
}

impl CavitySpec {
    pub fn new(fsr: f64, reflectivity_signal: f64, reflectivity_idler: f64) -> Result<Self> {
        let spec = Self {
            fsr,
            reflectivity_signal,
            reflectivity_idler,
            resonance_offset: 0.0,
            medium_inside: true,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn symmetric(fsr: f64, reflectivity: f64) -> Result<Self> {
        Self::new(fsr, reflectivity, reflectivity)
    }

    /// No cavity at all (R = 0 on both polarizations).
    pub fn none(fsr: f64) -> Result<Self> {
        Self::new(fsr, 0.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fsr.is_finite() && self.fsr > 0.0) {
            return Err(Error::InvalidArgument(format!("FSR must be positive, got {}", self.fsr)));
        }
        for (name, r) in [("signal", self.reflectivity_signal), ("idler", self.reflectivity_idler)] {
            if !(0.0..1.0).contains(&r) {
                return Err(Error::InvalidArgument(format!(
                    "{name} reflectivity must lie in [0, 1), got {r}"
                )));
            }
        }
        if !self.resonance_offset.is_finite() {
            return Err(Error::InvalidArgument("resonance offset must be finite".into()));
        }
        Ok(())
    }

    pub fn reflectivity(&self, photon: Photon) -> f64 {
        match photon {
            Photon::Signal => self.reflectivity_signal,
            Photon::Idler => self.reflectivity_idler,
        }
    }

    /// Half round-trip time π/ω̄: the delay that maps resonant states onto
    /// symmetric ones.
    pub fn half_round_trip(&self) -> f64 {
        PI / self.fsr
    }

    /// Pump frequency of the resonant class closest to `near`.
    pub fn resonant_pump_near(&self, near: f64) -> f64 {
        let base = 2.0 * self.resonance_offset;
        let n = ((near - base) / (2.0 * self.fsr)).round();
        base + 2.0 * n * self.fsr
    }

    fn single_pass_phase(&self, omega: f64) -> f64 {
        PI * (omega - self.resonance_offset) / self.fsr
    }
}

/// Lossless symmetric Fabry-Perot amplitude transmission
/// t(ω) = (1−R)e^{iφ} / (1 − R e^{2iφ}), φ = π(ω − ω_off)/ω̄.
pub fn amplitude_transmission(spec: &CavitySpec, photon: Photon, omega: f64) -> Complex64 {
    transmission_with_round_trip_phase(spec, photon, omega, 0.0)
}

/// As [`amplitude_transmission`], with `extra` (rad) added to the single-pass
/// phase inside the round-trip term only.
fn transmission_with_round_trip_phase(
    spec: &CavitySpec,
    photon: Photon,
    omega: f64,
    extra: f64,
) -> Complex64 {
    let r = spec.reflectivity(photon);
    let phi = spec.single_pass_phase(omega);
    let numerator = Complex64::from_polar(1.0 - r, phi);
    let denominator = Complex64::new(1.0, 0.0) - Complex64::from_polar(r, 2.0 * (phi + extra));
    numerator / denominator
}

/// Intracavity transmission of one photon including the medium's single-pass
/// phase on every round trip. Equals [`amplitude_transmission`] when the
/// medium is outside the cavity or carries no walk-off/dispersion.
pub fn photon_transmission(
    spec: &CavitySpec,
    medium: &PhaseMatchSpec,
    photon: Photon,
    omega: f64,
) -> Complex64 {
    let extra = if spec.medium_inside {
        medium.photon_phase(photon, omega - medium.degeneracy)
    } else {
        0.0
    };
    transmission_with_round_trip_phase(spec, photon, omega, extra)
}

/// C_cav(ω₊, ω₋) = T_s((ω₊+ω₋)/2)·T_i((ω₊−ω₋)/2).
pub fn cavity_factor(spec: &CavitySpec, omega_plus: f64, omega_minus: f64) -> Complex64 {
    amplitude_transmission(spec, Photon::Signal, 0.5 * (omega_plus + omega_minus))
        * amplitude_transmission(spec, Photon::Idler, 0.5 * (omega_plus - omega_minus))
}

/// Cavity factor with the intracavity medium phase, see [`photon_transmission`].
pub fn cavity_factor_with_medium(
    spec: &CavitySpec,
    medium: &PhaseMatchSpec,
    omega_plus: f64,
    omega_minus: f64,
) -> Complex64 {
    photon_transmission(spec, medium, Photon::Signal, 0.5 * (omega_plus + omega_minus))
        * photon_transmission(spec, medium, Photon::Idler, 0.5 * (omega_plus - omega_minus))
}

/// Airy intensity FWHM, 2ω̄·asin((1−R)/(2√R))/π.
pub fn linewidth(spec: &CavitySpec, photon: Photon) -> Result<f64> {
    let r = spec.reflectivity(photon);
    if r <= 0.0 {
        return Err(Error::NoLinewidth(r));
    }
    let s = ((1.0 - r) / (2.0 * r.sqrt())).min(1.0);
    Ok(2.0 * spec.fsr * s.asin() / PI)
}

/// Narrowest linewidth over both photons, ignoring mirror-less polarizations.
pub fn narrowest_linewidth(spec: &CavitySpec) -> Option<f64> {
    [Photon::Signal, Photon::Idler]
        .into_iter()
        .filter_map(|p| linewidth(spec, p).ok())
        .reduce(f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PumpLabel {
    Resonant,
    AntiResonant,
    Intermediate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpClass {
    pub label: PumpLabel,
    /// Signed detuning from the nearest even multiple of ω̄ (shifted by 2ω_off),
    /// in [−ω̄, ω̄].
    pub nearest_resonant_detuning: f64,
}

/// Classifies a pump frequency against the resonant (2nω̄) and anti-resonant
/// ((2n+1)ω̄) pump combs.
pub fn classify_pump(spec: &CavitySpec, pump: f64, tolerance: f64) -> Result<PumpClass> {
    if !(tolerance >= 0.0 && tolerance < 0.25 * spec.fsr) {
        return Err(Error::InvalidArgument(format!(
            "classification tolerance must lie in [0, FSR/4), got {tolerance}"
        )));
    }
    let detuning = pump - spec.resonant_pump_near(pump);
    let label = if detuning.abs() <= tolerance {
        PumpLabel::Resonant
    } else if (spec.fsr - detuning.abs()).abs() <= tolerance {
        PumpLabel::AntiResonant
    } else {
        PumpLabel::Intermediate
    };
    Ok(PumpClass { label, nearest_resonant_detuning: detuning })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::PhaseMatchShape;
    use crate::units::{ghz, thz};
    use approx::assert_relative_eq;

    const N_PUMP: f64 = 10_206.0;

    fn fsr() -> f64 {
        ghz(19.2)
    }

    fn airy(r: f64, phi: f64) -> f64 {
        (1.0 - r).powi(2) / (1.0 - 2.0 * r * (2.0 * phi).cos() + r * r)
    }

    #[test]
    fn resonance_is_lossless() {
        let c = CavitySpec::symmetric(fsr(), 0.8).unwrap();
        let t = amplitude_transmission(&c, Photon::Signal, 5_000.0 * fsr());
        assert_relative_eq!(t.norm_sqr(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn anti_resonance_values() {
        let c = CavitySpec::symmetric(fsr(), 0.8).unwrap();
        let t = amplitude_transmission(&c, Photon::Signal, 0.5 * fsr());
        // ((1−R)/(1+R))² = (0.2/1.8)²
        assert_relative_eq!(t.norm_sqr(), 0.012_345_679, epsilon = 1e-9);
        let c = CavitySpec::symmetric(fsr(), 0.27).unwrap();
        let t = amplitude_transmission(&c, Photon::Idler, 0.5 * fsr());
        assert_relative_eq!(t.norm_sqr(), 0.330_40, epsilon = 1e-5);
    }

    #[test]
    fn matches_airy_function() {
        for &r in &[0.0, 0.24, 0.27, 0.5, 0.8, 0.999] {
            let c = CavitySpec::symmetric(fsr(), r).unwrap();
            for k in 0..97 {
                let w = k as f64 * 0.0371 * fsr();
                let phi = PI * w / fsr();
                let t = amplitude_transmission(&c, Photon::Signal, w);
                assert_relative_eq!(t.norm_sqr(), airy(r, phi), max_relative = 1e-10);
                assert!(t.norm_sqr() > 0.0 && t.norm_sqr() <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn periodic_in_fsr() {
        let c = CavitySpec::new(fsr(), 0.27, 0.24).unwrap();
        for k in -5..=5 {
            for j in 0..20 {
                let w = thz(195.0) + j as f64 * 0.05 * fsr();
                let a = amplitude_transmission(&c, Photon::Signal, w).norm();
                let b = amplitude_transmission(&c, Photon::Signal, w + k as f64 * fsr()).norm();
                assert_relative_eq!(a, b, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn cavity_factor_cases() {
        let c = CavitySpec::symmetric(fsr(), 0.8).unwrap();
        let wr = 2.0 * N_PUMP * fsr();
        assert_relative_eq!(cavity_factor(&c, wr, 0.0).norm_sqr(), 1.0, epsilon = 1e-9);
        assert_relative_eq!(cavity_factor(&c, wr, 2.0 * fsr()).norm_sqr(), 1.0, epsilon = 1e-9);
        // both photons anti-resonant
        let v = cavity_factor(&c, wr, fsr()).norm_sqr();
        assert_relative_eq!(v, 0.012_345_679_f64.powi(2), max_relative = 1e-6);
        assert_relative_eq!(v, 1.524e-4, max_relative = 1e-3);

        let bare = CavitySpec::none(fsr()).unwrap();
        for k in 0..50 {
            let v = cavity_factor(&bare, wr + k as f64 * 1e9, k as f64 * 3.3e10);
            assert_relative_eq!(v.norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn medium_phase_reduces_to_plain_transmission() {
        let c = CavitySpec::new(fsr(), 0.27, 0.24).unwrap();
        let pm = PhaseMatchSpec::new(N_PUMP * fsr(), thz(21.82), PhaseMatchShape::Sinc).unwrap();
        for k in 0..40 {
            let w = 2.0 * N_PUMP * fsr();
            let wm = k as f64 * 0.13 * fsr();
            let a = cavity_factor(&c, w, wm);
            let b = cavity_factor_with_medium(&c, &pm, w, wm);
            assert!((a - b).norm() < 1e-12);
        }
        let outside = CavitySpec { medium_inside: false, ..c };
        let chirped = pm.with_phase(4e-14, 2e-27);
        let a = cavity_factor(&outside, 2.0 * N_PUMP * fsr(), thz(1.3));
        let b = cavity_factor_with_medium(&outside, &chirped, 2.0 * N_PUMP * fsr(), thz(1.3));
        assert!((a - b).norm() < 1e-12);
        let inside = cavity_factor_with_medium(&c, &chirped, 2.0 * N_PUMP * fsr(), thz(1.3));
        assert!((a - inside).norm() > 1e-3);
    }

    /// Independent FWHM by bisection on the Airy profile.
    fn airy_fwhm_numeric(r: f64) -> f64 {
        let (mut lo, mut hi) = (0.0_f64, PI / 2.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if airy(r, mid) > 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        2.0 * lo / PI
    }

    #[test]
    fn linewidth_values() {
        let c = CavitySpec::symmetric(1.0, 0.9).unwrap();
        let lw = linewidth(&c, Photon::Signal).unwrap();
        assert_relative_eq!(lw, 0.0335, max_relative = 1e-2);
        assert_relative_eq!(lw, airy_fwhm_numeric(0.9), max_relative = 1e-10);
        // small 1−R limit ω̄(1−R)/(π√R)
        assert_relative_eq!(lw, 0.1 / (PI * 0.9_f64.sqrt()), max_relative = 2e-3);

        let c = CavitySpec::symmetric(1.0, 0.27).unwrap();
        let lw = linewidth(&c, Photon::Signal).unwrap();
        assert_relative_eq!(lw, airy_fwhm_numeric(0.27), max_relative = 1e-10);
        assert_relative_eq!(lw, 0.495_81, max_relative = 1e-4);

        let c = CavitySpec::none(1.0).unwrap();
        assert!(matches!(linewidth(&c, Photon::Signal), Err(Error::NoLinewidth(_))));
        assert!(narrowest_linewidth(&c).is_none());
    }

    #[test]
    fn pump_classes() {
        let c = CavitySpec::new(fsr(), 0.27, 0.24).unwrap();
        let tol = 1e-3 * fsr();
        let wr = 2.0 * N_PUMP * fsr();
        let k = classify_pump(&c, wr, tol).unwrap();
        assert_eq!(k.label, PumpLabel::Resonant);
        assert_eq!(k.nearest_resonant_detuning, 0.0);
        let k = classify_pump(&c, wr + fsr(), tol).unwrap();
        assert_eq!(k.label, PumpLabel::AntiResonant);
        let k = classify_pump(&c, wr - fsr(), tol).unwrap();
        assert_eq!(k.label, PumpLabel::AntiResonant);
        let k = classify_pump(&c, wr + 0.5 * fsr(), tol).unwrap();
        assert_eq!(k.label, PumpLabel::Intermediate);
        assert_relative_eq!(k.nearest_resonant_detuning, 0.5 * fsr(), max_relative = 1e-9);
        assert!(classify_pump(&c, wr, 0.3 * fsr()).is_err());

        let shifted = CavitySpec { resonance_offset: 0.25 * fsr(), ..c };
        let k = classify_pump(&shifted, wr + 0.5 * fsr(), tol).unwrap();
        assert_eq!(k.label, PumpLabel::Resonant);
    }

    #[test]
    fn rejects_bad_reflectivity() {
        assert!(CavitySpec::symmetric(fsr(), 1.0).is_err());
        assert!(CavitySpec::symmetric(fsr(), -0.1).is_err());
        assert!(CavitySpec::symmetric(0.0, 0.5).is_err());
    }
}
