//! CSV and JSON writers, and the measured-data reader.
//!
//! Every CSV starts with `# qcomb <version> config_hash=<sha256>` and a header
//! row. Floats are written in shortest round-trip form, so identical inputs
//! give byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::biphoton::Jsa;
use crate::config::{emit_config, RunConfig};
use crate::error::{Error, Result};
use crate::estimation::{BandwidthReport, FitResult, Parameter};
use crate::hom::{ExtremumKind, HomTrace};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Hex SHA-256 of the canonical form of `config`, ignoring `output_dir`.
pub fn config_hash(config: &RunConfig) -> String {
    let canonical = RunConfig { output_dir: std::path::PathBuf::new(), ..config.clone() };
    let digest = Sha256::digest(emit_config(&canonical).as_bytes());
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn provenance(hash: &str) -> String {
    format!("# qcomb {VERSION} config_hash={hash}\n")
}

/// 1D states: one row per ω₋ sample with the intensity and the amplitude.
/// 2D states: a matrix whose first row holds ω₋, first column ω₊.
pub fn jsi_csv(jsa: &Jsa, hash: &str) -> String {
    let mut out = provenance(hash);
    let minus = jsa.grid.minus.coordinates();
    match &jsa.grid.plus {
        None => {
            out.push_str("omega_minus_rad_per_s,jsi,re,im\n");
            for (w, c) in minus.iter().zip(&jsa.amplitudes) {
                let _ = writeln!(out, "{w:?},{:?},{:?},{:?}", c.norm_sqr(), c.re, c.im);
            }
        }
        Some(plus) => {
            out.push_str("omega_plus_rad_per_s\\omega_minus_rad_per_s");
            for w in &minus {
                let _ = write!(out, ",{w:?}");
            }
            out.push('\n');
            for (r, row) in jsa.rows().enumerate() {
                let _ = write!(out, "{:?}", plus.coordinate(r));
                for c in row {
                    let _ = write!(out, ",{:?}", c.norm_sqr());
                }
                out.push('\n');
            }
        }
    }
    out
}

pub fn trace_csv(trace: &HomTrace, hash: &str) -> String {
    let mut out = provenance(hash);
    out.push_str("tau_s,p_coincidence,p_normalized\n");
    for ((t, p), n) in trace.delays.iter().zip(&trace.coincidence).zip(trace.normalized()) {
        let _ = writeln!(out, "{t:?},{p:?},{n:?}");
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    /// Pump detuning from the nearest resonant pump (rad/s).
    pub detuning: f64,
    pub exchange_overlap_re: f64,
    pub visibility: f64,
    pub kind: ExtremumKind,
}

pub fn sweep_csv(rows: &[SweepRow], hash: &str) -> String {
    let mut out = provenance(hash);
    out.push_str("detuning_rad_per_s,re_s,visibility,extremum_kind\n");
    for r in rows {
        let _ = writeln!(out, "{:?},{:?},{:?},{}", r.detuning, r.exchange_overlap_re, r.visibility, r.kind.as_str());
    }
    out
}

pub fn counts_csv(delays: &[f64], counts: &[f64], hash: &str) -> String {
    let mut out = provenance(hash);
    out.push_str("tau_s,counts\n");
    for (t, c) in delays.iter().zip(counts) {
        let _ = writeln!(out, "{t:?},{c:?}");
    }
    out
}

/// Reads `tau_s,counts` data. Lines starting with `#` and a leading header row
/// are skipped; line numbers in errors are 1-based.
pub fn read_counts(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_counts(&text, path)
}

pub fn parse_counts(text: &str, path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let bad = |line: usize, message: String| Error::DataFormat { path: path.to_path_buf(), line, message };
    let mut delays = Vec::new();
    let mut counts = Vec::new();
    let mut header_seen = false;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if !header_seen {
            header_seen = true;
            if fields.first().is_some_and(|f| f.parse::<f64>().is_err()) {
                if fields != ["tau_s", "counts"] {
                    return Err(bad(i + 1, format!("expected header tau_s,counts, got {line:?}")));
                }
                continue;
            }
        }
        if fields.len() != 2 {
            return Err(bad(i + 1, format!("expected 2 fields, got {}", fields.len())));
        }
        let parse = |s: &str, what: &str| -> Result<f64> {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(i + 1, format!("{what} {s:?} is not a finite number")))
        };
        delays.push(parse(fields[0], "delay")?);
        counts.push(parse(fields[1], "count")?);
    }
    if delays.is_empty() {
        return Err(bad(0, "no data rows".into()));
    }
    Ok((delays, counts))
}

pub fn jsi_meta_json(jsa: &Jsa, config: &RunConfig, report: Option<&crate::biphoton::SymmetryReport>, peaks: Option<usize>) -> Value {
    let hash = config_hash(config);
    let mut v = json!({
        "version": VERSION,
        "config_hash": hash,
        "dimensions": if jsa.grid.is_2d() { 2 } else { 1 },
        "rows": jsa.grid.rows(),
        "cols": jsa.grid.cols(),
        "norm_sqr": jsa.norm_sqr(),
        "pump_frequency_rad_per_s": jsa.pump_frequency,
        "factors": jsa.factors.iter().map(|f| format!("{f:?}")).collect::<Vec<_>>(),
    });
    if let Some(r) = report {
        v["exchange_overlap"] = json!({"re": r.exchange_overlap.re, "im": r.exchange_overlap.im});
        v["symmetry"] = json!(format!("{:?}", r.label));
        v["pump_class"] = json!(format!("{:?}", r.pump_class.label));
        v["pump_detuning_rad_per_s"] = json!(r.pump_class.nearest_resonant_detuning);
    }
    if let Some(n) = peaks {
        v["comb_peaks"] = json!(n);
    }
    v
}

pub fn hom_report_json(trace: &HomTrace, width: Option<f64>, config: &RunConfig) -> Value {
    json!({
        "version": VERSION,
        "config_hash": config_hash(config),
        "visibility": trace.visibility(),
        "baseline": trace.baseline,
        "extremum": trace.extremum,
        "extremum_delay_s": trace.extremum_delay,
        "extremum_kind": trace.extremum_kind.as_str(),
        "width_s": width,
        "window_overlaps_feature": trace.window_overlaps_feature,
        "delay_stage_s": config.delay,
    })
}

pub fn fit_report_json(result: &FitResult, bandwidth: Option<&BandwidthReport>) -> Value {
    let mut params = serde_json::Map::new();
    for p in Parameter::ALL {
        let e = &result.parameters[p.index()];
        params.insert(
            p.name().into(),
            json!({
                "value": e.value,
                "half_width": e.half_width,
                "fixed": e.fixed,
                "at_lower_bound": e.at_lower_bound,
                "at_upper_bound": e.at_upper_bound,
            }),
        );
    }
    let mut v = json!({
        "parameters": params,
        "residual": result.residual,
        "converged": result.converged,
        "iterations": result.iterations,
        "evaluations": result.evaluations,
        "start": result.start,
    });
    if let Some(b) = bandwidth {
        v["bandwidth"] = json!({
            "delta_omega_minus_rad_per_s": b.delta_omega_minus,
            "delta_nu_minus_hz": b.delta_nu_minus,
            "center_wavelength_m": b.center_wavelength,
            "delta_lambda_si_m": b.delta_lambda_si,
        });
    }
    v
}

/// Writes `contents` to `dir/name`, creating `dir` as needed.
pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

pub fn write_json(dir: &Path, name: &str, value: &Value) -> Result<PathBuf> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    write_file(dir, name, &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_round_trip() {
        let d = [-1e-13, 0.0, 2.5e-13];
        let c = [10.0, 3.0, 12.0];
        let (d2, c2) = parse_counts(&counts_csv(&d, &c, "abc"), Path::new("x.csv")).unwrap();
        assert_eq!(d2, d);
        assert_eq!(c2, c);
    }

    #[test]
    fn malformed_row_names_line() {
        let text = "tau_s,counts\n0,1\n1e-15,abc\n";
        match parse_counts(text, Path::new("d.csv")) {
            Err(Error::DataFormat { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match parse_counts("0,1,2\n", Path::new("d.csv")) {
            Err(Error::DataFormat { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn headerless_data_accepted() {
        let (d, c) = parse_counts("# note\n0,5\n1,6\n", Path::new("d.csv")).unwrap();
        assert_eq!(d, vec![0.0, 1.0]);
        assert_eq!(c, vec![5.0, 6.0]);
    }

    #[test]
    fn hash_ignores_output_dir_only() {
        let text = r#"{
            "pump": {"mode": "monochromatic", "center_fsr_multiple": 1960},
            "phase_match": {"bandwidth_thz": 2},
            "cavity": {"fsr_ghz": 200, "reflectivity_signal": 0.5, "reflectivity_idler": 0.5},
            "grid": {"span_minus_thz": 12, "points_minus": 2561}
        }"#;
        let a = crate::config::parse_config(text).unwrap();
        let b = RunConfig { output_dir: "elsewhere".into(), ..a.clone() };
        let c = RunConfig { seed: 1, ..a.clone() };
        assert_eq!(config_hash(&a), config_hash(&b));
        assert_ne!(config_hash(&a), config_hash(&c));
        assert_eq!(config_hash(&a).len(), 64);
    }
}
