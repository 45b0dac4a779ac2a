//! JSON run configuration.
//!
//! Frequencies are given under one of several unit-suffixed keys
//! (`_thz`, `_ghz`, `_mhz`, `_khz`, `_hz`, `_rad_per_s`); exactly one encoding
//! per field may be present. [`emit_config`] writes rad/s and seconds so that
//! parsing its output reproduces the configuration exactly.

use std::f64::consts::TAU;
use std::path::PathBuf;

use serde_json::{Map, Value};

use crate::biphoton::{Axis, SpectralGrid};
use crate::cavity::CavitySpec;
use crate::error::{Error, Result};
use crate::estimation::Parameter;
use crate::spectral::{FilterShape, FilterSpec, PhaseMatchShape, PhaseMatchSpec, PumpMode, PumpSpec};
use crate::units::{omega_width_from_wavelength, wavelength_from_omega};

const FREQUENCY_UNITS: [(&str, f64); 6] =
    [("thz", TAU * 1e12), ("ghz", TAU * 1e9), ("mhz", TAU * 1e6), ("khz", TAU * 1e3), ("hz", TAU), ("rad_per_s", 1.0)];
const TIME_UNITS: [(&str, f64); 3] = [("s", 1.0), ("ps", 1e-12), ("fs", 1e-15)];
const TIME2_UNITS: [(&str, f64); 3] = [("s2", 1.0), ("ps2", 1e-24), ("fs2", 1e-30)];

/// Delay range scanned by the `hom` and `fit` commands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomSettings {
    /// Full delay span (s); `None` picks 120/Δω₋.
    pub span: Option<f64>,
    /// Delay centre (s).
    pub center: f64,
    pub points: usize,
}

impl Default for HomSettings {
    fn default() -> Self {
        Self { span: None, center: 0.0, points: 1201 }
    }
}

impl HomSettings {
    pub fn delays(&self, bandwidth: f64) -> Vec<f64> {
        let span = self.span.unwrap_or(120.0 / bandwidth);
        crate::hom::linspace(self.center - 0.5 * span, self.center + 0.5 * span, self.points)
    }
}

/// Pump-detuning scan of the `sweep` command, over [0, 2ω̄] from the resonant
/// pump nearest to the configured one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSettings {
    pub steps: usize,
    /// Delay-stage setting applied before the symmetry and HOM analysis;
    /// `None` means half a round trip, π/ω̄.
    pub delay: Option<f64>,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self { steps: 41, delay: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitSettingsConfig {
    pub data: Option<PathBuf>,
    pub starts: usize,
    pub poisson_weights: bool,
    pub fixed: Vec<Parameter>,
    /// Mean pairs per delay bin for `simulate`.
    pub pairs_per_bin: f64,
    /// `simulate` writes expected counts instead of Poisson draws.
    pub noiseless: bool,
}

impl Default for FitSettingsConfig {
    fn default() -> Self {
        Self { data: None, starts: 8, poisson_weights: false, fixed: Vec::new(), pairs_per_bin: 1e4, noiseless: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub pump: PumpSpec,
    pub phase_match: PhaseMatchSpec,
    pub cavity: CavitySpec,
    pub grid: SpectralGrid,
    /// Delay-stage setting τ (s).
    pub delay: f64,
    pub filter: Option<FilterSpec>,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub hom: HomSettings,
    pub sweep: SweepSettings,
    pub fit: FitSettingsConfig,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.pump.validate()?;
        self.phase_match.validate()?;
        self.cavity.validate()?;
        self.grid.minus.validate()?;
        if let Some(p) = &self.grid.plus {
            p.validate()?;
        }
        if let Some(f) = &self.filter {
            f.validate()?;
        }
        if self.grid.is_2d() != (self.pump.mode == PumpMode::GaussianBroadband) {
            return Err(Error::Config(
                "grid.points_plus is required for a gaussian pump and not allowed for a monochromatic one".into(),
            ));
        }
        if !self.delay.is_finite() {
            return Err(Error::Config("delay must be finite".into()));
        }
        if self.hom.points < 2 * crate::hom::MIN_BASELINE_SAMPLES {
            return Err(Error::Config(format!(
                "hom.points must be at least {}",
                2 * crate::hom::MIN_BASELINE_SAMPLES
            )));
        }
        if self.hom.span.is_some_and(|s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::Config("hom.span must be positive".into()));
        }
        if self.sweep.steps < 2 {
            return Err(Error::Config(format!("sweep.steps must be at least 2, got {}", self.sweep.steps)));
        }
        if self.fit.starts == 0 {
            return Err(Error::Config("fit.starts must be at least 1".into()));
        }
        if !(self.fit.pairs_per_bin > 0.0 && self.fit.pairs_per_bin.is_finite()) {
            return Err(Error::Config("fit.pairs_per_bin must be positive".into()));
        }
        Ok(())
    }
}

/// Typed reader over one JSON object that records consumed keys, so leftover
/// keys can be reported as unknown.
struct Section<'a> {
    path: String,
    map: &'a Map<String, Value>,
    known: Vec<String>,
    missing: &'a mut Vec<String>,
}

impl<'a> Section<'a> {
    fn new(path: &str, value: &'a Value, missing: &'a mut Vec<String>) -> Result<Self> {
        let map = value
            .as_object()
            .ok_or_else(|| Error::Config(format!("{} must be an object", if path.is_empty() { "document" } else { path })))?;
        Ok(Self { path: path.to_string(), map, known: Vec::new(), missing })
    }

    fn key_path(&self, key: &str) -> String {
        if self.path.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.path)
        }
    }

    fn number(&self, key: &str, v: &Value) -> Result<f64> {
        v.as_f64()
            .filter(|x| x.is_finite())
            .ok_or_else(|| Error::Config(format!("{} must be a finite number", self.key_path(key))))
    }

    /// One field encoded under `base_<suffix>` for any listed unit; converted
    /// with the unit's scale. `extra` lists further encodings with their own
    /// conversion closures.
    fn quantity(
        &mut self,
        base: &str,
        units: &[(&str, f64)],
        extra: &[(&str, &Conversion<'_>)],
        required: bool,
    ) -> Result<Option<f64>> {
        let mut found: Vec<(String, f64)> = Vec::new();
        for (suffix, scale) in units {
            let key = format!("{base}_{suffix}");
            self.known.push(key.clone());
            if let Some(v) = self.map.get(&key) {
                found.push((key.clone(), self.number(&key, v)? * scale));
            }
        }
        for (suffix, convert) in extra {
            let key = format!("{base}_{suffix}");
            self.known.push(key.clone());
            if let Some(v) = self.map.get(&key) {
                found.push((key.clone(), convert(self.number(&key, v)?)?));
            }
        }
        match found.len() {
            0 => {
                if required {
                    self.missing.push(self.key_path(&format!("{base}_{}", units[0].0)));
                }
                Ok(None)
            }
            1 => Ok(Some(found[0].1)),
            _ => Err(Error::Config(format!(
                "ambiguous units: {} are encodings of the same field",
                found.iter().map(|(k, _)| self.key_path(k)).collect::<Vec<_>>().join(" and ")
            ))),
        }
    }

    fn plain(&mut self, key: &str, required: bool) -> Option<&'a Value> {
        self.known.push(key.to_string());
        let v = self.map.get(key);
        if v.is_none() && required {
            self.missing.push(self.key_path(key));
        }
        v
    }

    fn f64(&mut self, key: &str, required: bool) -> Result<Option<f64>> {
        match self.plain(key, required) {
            Some(v) => Ok(Some(self.number(key, v)?)),
            None => Ok(None),
        }
    }

    fn usize(&mut self, key: &str, required: bool) -> Result<Option<usize>> {
        match self.plain(key, required) {
            Some(v) => v
                .as_u64()
                .map(|n| Some(n as usize))
                .ok_or_else(|| Error::Config(format!("{} must be a non-negative integer", self.key_path(key)))),
            None => Ok(None),
        }
    }

    fn bool(&mut self, key: &str) -> Result<Option<bool>> {
        match self.plain(key, false) {
            Some(v) => v
                .as_bool()
                .map(Some)
                .ok_or_else(|| Error::Config(format!("{} must be true or false", self.key_path(key)))),
            None => Ok(None),
        }
    }

    fn string(&mut self, key: &str, required: bool) -> Result<Option<&'a str>> {
        match self.plain(key, required) {
            Some(v) => v
                .as_str()
                .map(Some)
                .ok_or_else(|| Error::Config(format!("{} must be a string", self.key_path(key)))),
            None => Ok(None),
        }
    }

    fn child(&mut self, key: &str, required: bool) -> Option<&'a Value> {
        self.plain(key, required)
    }

    fn finish(&self) -> Result<()> {
        for key in self.map.keys() {
            if !self.known.iter().any(|k| k == key) {
                return Err(Error::Config(format!("unknown key {}", self.key_path(key))));
            }
        }
        Ok(())
    }
}

fn choice<T: Copy>(path: &str, value: &str, options: &[(&str, T)]) -> Result<T> {
    options.iter().find(|(name, _)| *name == value).map(|(_, v)| *v).ok_or_else(|| {
        Error::Config(format!(
            "{path} must be one of {}, got {value:?}",
            options.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", ")
        ))
    })
}

const PUMP_MODES: [(&str, PumpMode); 2] =
    [("monochromatic", PumpMode::Monochromatic), ("gaussian", PumpMode::GaussianBroadband)];
const PM_SHAPES: [(&str, PhaseMatchShape); 2] = [("sinc", PhaseMatchShape::Sinc), ("gaussian", PhaseMatchShape::Gaussian)];
const FILTER_SHAPES: [(&str, FilterShape); 2] = [("top_hat", FilterShape::TopHat), ("gaussian", FilterShape::Gaussian)];
const PARAMETERS: [(&str, Parameter); 5] = [
    ("bandwidth", Parameter::Bandwidth),
    ("walkoff", Parameter::Walkoff),
    ("dispersion", Parameter::Dispersion),
    ("amplitude", Parameter::Amplitude),
    ("offset", Parameter::Offset),
];

type Conversion<'a> = dyn Fn(f64) -> Result<f64> + 'a;

fn name_of<T: PartialEq + Copy>(options: &[(&'static str, T)], v: T) -> &'static str {
    options.iter().find(|(_, x)| *x == v).map(|(n, _)| *n).unwrap_or("?")
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::Config(format!("malformed JSON: {e}")))?;
    let mut missing = Vec::new();
    let config = parse_document(&doc, &mut missing)?;
    if !missing.is_empty() {
        return Err(Error::MissingKeys(missing));
    }
    let config = config.expect("all required keys present");
    config.validate()?;
    Ok(config)
}

fn parse_document(doc: &Value, missing: &mut Vec<String>) -> Result<Option<RunConfig>> {
    // Sections are parsed in dependency order; a missing section still
    // contributes its required keys to the report.
    let mut root_missing = Vec::new();
    let mut root = Section::new("", doc, &mut root_missing)?;
    let empty = Value::Object(Map::new());
    let cavity_v = root.child("cavity", false).unwrap_or(&empty);
    let pump_v = root.child("pump", false).unwrap_or(&empty);
    let pm_v = root.child("phase_match", false).unwrap_or(&empty);
    let grid_v = root.child("grid", false).unwrap_or(&empty);
    let filter_v = root.child("filter", false);
    let hom_v = root.child("hom", false);
    let sweep_v = root.child("sweep", false);
    let fit_v = root.child("fit", false);
    let delay_units: Vec<(&str, f64)> = TIME_UNITS.to_vec();

    // cavity
    let mut sec = Section::new("cavity", cavity_v, missing)?;
    let fsr = sec.quantity("fsr", &FREQUENCY_UNITS, &[], true)?;
    let r_s = sec.f64("reflectivity_signal", true)?;
    let r_i = sec.f64("reflectivity_idler", true)?;
    let offset = sec.quantity("resonance_offset", &FREQUENCY_UNITS, &[], false)?.unwrap_or(0.0);
    let medium_inside = sec.bool("medium_inside")?.unwrap_or(true);
    sec.finish()?;
    let cavity = match (fsr, r_s, r_i) {
        (Some(fsr), Some(rs), Some(ri)) => Some(CavitySpec {
            fsr,
            reflectivity_signal: rs,
            reflectivity_idler: ri,
            resonance_offset: offset,
            medium_inside,
        }),
        _ => None,
    };

    // pump
    let mut sec = Section::new("pump", pump_v, missing)?;
    let mode = sec.string("mode", true)?;
    let multiple = |m: f64| -> Result<f64> {
        match &cavity {
            Some(c) => Ok(2.0 * c.resonance_offset + m * c.fsr),
            None => Err(Error::Config("pump.center_fsr_multiple needs a complete cavity section".into())),
        }
    };
    let center = sec.quantity("center", &FREQUENCY_UNITS, &[("fsr_multiple", &multiple)], true)?;
    let linewidth = sec.quantity("linewidth", &FREQUENCY_UNITS, &[], false)?;
    sec.finish()?;
    let pump = match (mode, center) {
        (Some(mode), Some(center)) => {
            let mode = choice("pump.mode", mode, &PUMP_MODES)?;
            let linewidth = match (mode, linewidth) {
                (PumpMode::Monochromatic, _) => linewidth.unwrap_or(0.0),
                (PumpMode::GaussianBroadband, Some(l)) => l,
                (PumpMode::GaussianBroadband, None) => {
                    missing.push("pump.linewidth_thz".into());
                    0.0
                }
            };
            Some(PumpSpec { center, mode, linewidth })
        }
        _ => None,
    };

    // phase matching
    let mut sec = Section::new("phase_match", pm_v, missing)?;
    let degeneracy = sec.quantity("degeneracy", &FREQUENCY_UNITS, &[], false)?;
    let bandwidth = sec.quantity("bandwidth", &FREQUENCY_UNITS, &[], true)?;
    let walkoff = sec.quantity("walkoff", &delay_units, &[], false)?.unwrap_or(0.0);
    let dispersion = sec.quantity("dispersion", &TIME2_UNITS, &[], false)?.unwrap_or(0.0);
    let shape = sec.string("shape", false)?.unwrap_or("sinc");
    sec.finish()?;
    let shape = choice("phase_match.shape", shape, &PM_SHAPES)?;
    let phase_match = match (bandwidth, &pump) {
        (Some(bandwidth), Some(p)) => Some(PhaseMatchSpec {
            degeneracy: degeneracy.unwrap_or(0.5 * p.center),
            bandwidth,
            walkoff,
            dispersion,
            shape,
        }),
        _ => None,
    };

    // grid
    let mut sec = Section::new("grid", grid_v, missing)?;
    let span_minus = sec.quantity("span_minus", &FREQUENCY_UNITS, &[], true)?;
    let points_minus = sec.usize("points_minus", true)?;
    let center_minus = sec.quantity("center_minus", &FREQUENCY_UNITS, &[], false)?.unwrap_or(0.0);
    let span_plus = sec.quantity("span_plus", &FREQUENCY_UNITS, &[], false)?;
    let points_plus = sec.usize("points_plus", false)?;
    let center_plus = sec.quantity("center_plus", &FREQUENCY_UNITS, &[], false)?;
    sec.finish()?;
    let grid = match (span_minus, points_minus) {
        (Some(span), Some(points)) => {
            let minus = Axis { center: center_minus, span, points };
            match (span_plus, points_plus) {
                (None, None) => Some(SpectralGrid::line(minus)),
                (Some(span), Some(points)) => {
                    let center = center_plus.or(pump.as_ref().map(|p| p.center)).unwrap_or(0.0);
                    Some(SpectralGrid::plane(Axis { center, span, points }, minus))
                }
                _ => return Err(Error::Config("grid.span_plus and grid.points_plus go together".into())),
            }
        }
        _ => None,
    };

    // delay stage
    let half_trip = |n: f64| -> Result<f64> {
        match &cavity {
            Some(c) => Ok(n * c.half_round_trip()),
            None => Err(Error::Config("delay_half_round_trips needs a complete cavity section".into())),
        }
    };
    // the root section borrows its own missing-list; merged below
    let delay = root.quantity("delay", &delay_units, &[("half_round_trips", &half_trip)], false)?.unwrap_or(0.0);
    let output_dir = PathBuf::from(root.string("output_dir", false)?.unwrap_or("out"));
    let seed = root.usize("seed", false)?.unwrap_or(0) as u64;
    root.finish()?;

    // filter
    let filter = match filter_v {
        Some(v) => {
            let mut sec = Section::new("filter", v, missing)?;
            let center = sec.quantity("center", &FREQUENCY_UNITS, &[], false)?;
            let center = center.or(phase_match.as_ref().map(|p| p.degeneracy));
            let to_omega = |nm: f64| -> Result<f64> {
                match center {
                    Some(c) => Ok(omega_width_from_wavelength(nm * 1e-9, wavelength_from_omega(c))),
                    None => Err(Error::Config("filter.bandwidth_nm needs a filter centre".into())),
                }
            };
            let bandwidth = sec.quantity("bandwidth", &FREQUENCY_UNITS, &[("nm", &to_omega)], true)?;
            let shape = sec.string("shape", false)?.unwrap_or("top_hat");
            sec.finish()?;
            let shape = choice("filter.shape", shape, &FILTER_SHAPES)?;
            match (center, bandwidth) {
                (Some(center), Some(bandwidth)) => Some(FilterSpec { center, bandwidth, shape }),
                _ => None,
            }
        }
        None => None,
    };

    let mut hom = HomSettings::default();
    if let Some(v) = hom_v {
        let mut sec = Section::new("hom", v, missing)?;
        hom.span = sec.quantity("span", &delay_units, &[], false)?;
        hom.center = sec.quantity("center", &delay_units, &[], false)?.unwrap_or(0.0);
        hom.points = sec.usize("points", false)?.unwrap_or(hom.points);
        sec.finish()?;
    }
    let mut sweep = SweepSettings::default();
    if let Some(v) = sweep_v {
        let mut sec = Section::new("sweep", v, missing)?;
        sweep.steps = sec.usize("steps", false)?.unwrap_or(sweep.steps);
        sweep.delay = sec.quantity("delay", &delay_units, &[], false)?;
        sec.finish()?;
    }
    let mut fit = FitSettingsConfig::default();
    if let Some(v) = fit_v {
        let mut sec = Section::new("fit", v, missing)?;
        fit.data = sec.string("data", false)?.map(PathBuf::from);
        fit.starts = sec.usize("starts", false)?.unwrap_or(fit.starts);
        fit.poisson_weights = sec.bool("poisson_weights")?.unwrap_or(false);
        fit.pairs_per_bin = sec.f64("pairs_per_bin", false)?.unwrap_or(fit.pairs_per_bin);
        fit.noiseless = sec.bool("noiseless")?.unwrap_or(false);
        if let Some(list) = sec.plain("fixed", false) {
            let items = list.as_array().ok_or_else(|| Error::Config("fit.fixed must be an array".into()))?;
            for item in items {
                let name = item.as_str().ok_or_else(|| Error::Config("fit.fixed entries must be strings".into()))?;
                let p = choice("fit.fixed[]", name, &PARAMETERS)?;
                if !fit.fixed.contains(&p) {
                    fit.fixed.push(p);
                }
            }
        }
        sec.finish()?;
    }

    let mut all_missing = root_missing;
    all_missing.append(missing);
    *missing = all_missing;
    if !missing.is_empty() {
        return Ok(None);
    }
    Ok(Some(RunConfig {
        pump: pump.expect("pump keys present"),
        phase_match: phase_match.expect("phase_match keys present"),
        cavity: cavity.expect("cavity keys present"),
        grid: grid.expect("grid keys present"),
        delay,
        filter,
        output_dir,
        seed,
        hom,
        sweep,
        fit,
    }))
}

/// Canonical JSON document for `config`, in rad/s and seconds.
pub fn emit_config(config: &RunConfig) -> String {
    let mut doc = Map::new();
    let mut pump = Map::new();
    pump.insert("mode".into(), name_of(&PUMP_MODES, config.pump.mode).into());
    pump.insert("center_rad_per_s".into(), config.pump.center.into());
    if config.pump.mode == PumpMode::GaussianBroadband {
        pump.insert("linewidth_rad_per_s".into(), config.pump.linewidth.into());
    }
    doc.insert("pump".into(), pump.into());

    let pm = &config.phase_match;
    let mut m = Map::new();
    m.insert("degeneracy_rad_per_s".into(), pm.degeneracy.into());
    m.insert("bandwidth_rad_per_s".into(), pm.bandwidth.into());
    m.insert("walkoff_s".into(), pm.walkoff.into());
    m.insert("dispersion_s2".into(), pm.dispersion.into());
    m.insert("shape".into(), name_of(&PM_SHAPES, pm.shape).into());
    doc.insert("phase_match".into(), m.into());

    let c = &config.cavity;
    let mut m = Map::new();
    m.insert("fsr_rad_per_s".into(), c.fsr.into());
    m.insert("reflectivity_signal".into(), c.reflectivity_signal.into());
    m.insert("reflectivity_idler".into(), c.reflectivity_idler.into());
    m.insert("resonance_offset_rad_per_s".into(), c.resonance_offset.into());
    m.insert("medium_inside".into(), c.medium_inside.into());
    doc.insert("cavity".into(), m.into());

    let mut m = Map::new();
    m.insert("span_minus_rad_per_s".into(), config.grid.minus.span.into());
    m.insert("points_minus".into(), config.grid.minus.points.into());
    m.insert("center_minus_rad_per_s".into(), config.grid.minus.center.into());
    if let Some(p) = &config.grid.plus {
        m.insert("span_plus_rad_per_s".into(), p.span.into());
        m.insert("points_plus".into(), p.points.into());
        m.insert("center_plus_rad_per_s".into(), p.center.into());
    }
    doc.insert("grid".into(), m.into());

    doc.insert("delay_s".into(), config.delay.into());
    if let Some(f) = &config.filter {
        let mut m = Map::new();
        m.insert("center_rad_per_s".into(), f.center.into());
        m.insert("bandwidth_rad_per_s".into(), f.bandwidth.into());
        m.insert("shape".into(), name_of(&FILTER_SHAPES, f.shape).into());
        doc.insert("filter".into(), m.into());
    }
    doc.insert("output_dir".into(), config.output_dir.to_string_lossy().into_owned().into());
    doc.insert("seed".into(), config.seed.into());

    let mut m = Map::new();
    if let Some(span) = config.hom.span {
        m.insert("span_s".into(), span.into());
    }
    m.insert("center_s".into(), config.hom.center.into());
    m.insert("points".into(), config.hom.points.into());
    doc.insert("hom".into(), m.into());

    let mut m = Map::new();
    m.insert("steps".into(), config.sweep.steps.into());
    if let Some(d) = config.sweep.delay {
        m.insert("delay_s".into(), d.into());
    }
    doc.insert("sweep".into(), m.into());

    let f = &config.fit;
    let mut m = Map::new();
    if let Some(d) = &f.data {
        m.insert("data".into(), d.to_string_lossy().into_owned().into());
    }
    m.insert("starts".into(), f.starts.into());
    m.insert("poisson_weights".into(), f.poisson_weights.into());
    m.insert("fixed".into(), f.fixed.iter().map(|p| Value::from(name_of(&PARAMETERS, *p))).collect::<Vec<_>>().into());
    m.insert("pairs_per_bin".into(), f.pairs_per_bin.into());
    m.insert("noiseless".into(), f.noiseless.into());
    doc.insert("fit".into(), m.into());

    serde_json::to_string_pretty(&Value::Object(doc)).expect("configuration serializes")
}

/// Reads and parses a configuration file.
pub fn load_config(path: &std::path::Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}
