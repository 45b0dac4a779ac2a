use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Linear (non-circular) autocorrelation of a 2D intensity map.
#[derive(Debug, Clone)]
pub struct Autocorrelation {
    padded_rows: usize,
    padded_cols: usize,
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl Autocorrelation {
    /// Σ_x J(x)·J(x + shift) for a shift in samples (row, col).
    pub fn at(&self, shift_rows: isize, shift_cols: isize) -> Option<f64> {
        if shift_rows.unsigned_abs() >= self.rows || shift_cols.unsigned_abs() >= self.cols {
            return None;
        }
        let i = shift_rows.rem_euclid(self.padded_rows as isize) as usize;
        let j = shift_cols.rem_euclid(self.padded_cols as isize) as usize;
        Some(self.values[i * self.padded_cols + j])
    }
}

fn fft_rows(data: &mut [Complex64], cols: usize, planner: &mut FftPlanner<f64>, inverse: bool) {
    let fft = if inverse { planner.plan_fft_inverse(cols) } else { planner.plan_fft_forward(cols) };
    for row in data.chunks_mut(cols) {
        fft.process(row);
    }
}

fn transpose(data: &[Complex64], rows: usize, cols: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = data[r * cols + c];
        }
    }
    out
}

/// Autocorrelation of a row-major `rows × cols` map via zero-padded FFTs.
pub fn jsi_autocorrelation(jsi: &[f64], rows: usize, cols: usize) -> Result<Autocorrelation> {
    if rows == 0 || cols == 0 || jsi.len() != rows * cols {
        return Err(Error::InvalidArgument(format!(
            "intensity map of length {} does not match {rows}x{cols}",
            jsi.len()
        )));
    }
    let (pr, pc) = (2 * rows, 2 * cols);
    let mut buf = vec![Complex64::new(0.0, 0.0); pr * pc];
    for r in 0..rows {
        for c in 0..cols {
            buf[r * pc + c] = Complex64::new(jsi[r * cols + c], 0.0);
        }
    }
    let mut planner = FftPlanner::new();
    fft_rows(&mut buf, pc, &mut planner, false);
    let mut t = transpose(&buf, pr, pc);
    fft_rows(&mut t, pr, &mut planner, false);
    for v in t.iter_mut() {
        *v = Complex64::new(v.norm_sqr(), 0.0);
    }
    fft_rows(&mut t, pr, &mut planner, true);
    let mut back = transpose(&t, pc, pr);
    fft_rows(&mut back, pc, &mut planner, true);
    let scale = 1.0 / (pr * pc) as f64;
    let values = back.iter().map(|v| v.re * scale).collect();
    Ok(Autocorrelation { padded_rows: pr, padded_cols: pc, rows, cols, values })
}

/// Shift (in samples) of the largest autocorrelation value inside a square
/// window of half-width `radius` around `expected`.
pub fn locate_peak_near(ac: &Autocorrelation, expected: (isize, isize), radius: isize) -> Option<(isize, isize)> {
    let mut best: Option<((isize, isize), f64)> = None;
    for di in -radius..=radius {
        for dj in -radius..=radius {
            let s = (expected.0 + di, expected.1 + dj);
            if let Some(v) = ac.at(s.0, s.1) {
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((s, v));
                }
            }
        }
    }
    best.map(|(s, _)| s)
}
