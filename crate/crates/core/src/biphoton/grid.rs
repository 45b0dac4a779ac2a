use crate::error::{Error, Result};

/// Uniform sampling of one frequency axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub center: f64,
    /// Distance between the first and last sample (rad/s).
    pub span: f64,
    pub points: usize,
}

impl Axis {
    pub fn new(center: f64, span: f64, points: usize) -> Result<Self> {
        let axis = Self { center, span, points };
        axis.validate()?;
        Ok(axis)
    }

    /// Axis centred on zero with a sample exactly at zero. `points` is rounded
    /// up to the next odd number.
    pub fn symmetric(span: f64, points: usize) -> Result<Self> {
        Self::new(0.0, span, points | 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 3 {
            return Err(Error::InvalidArgument(format!(
                "an axis needs at least 3 points, got {}",
                self.points
            )));
        }
        if !(self.span.is_finite() && self.span > 0.0) {
            return Err(Error::InvalidArgument(format!("axis span must be positive, got {}", self.span)));
        }
        if !self.center.is_finite() {
            return Err(Error::InvalidArgument("axis centre must be finite".into()));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        self.span / (self.points - 1) as f64
    }

    /// Sample `k`, written as centre + (k − mid)·step so that mirrored samples
    /// of a zero-centred odd axis are exact negatives.
    pub fn coordinate(&self, k: usize) -> f64 {
        let mid = 0.5 * (self.points - 1) as f64;
        self.center + (k as f64 - mid) * self.step()
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.points).map(|k| self.coordinate(k)).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        self.center == 0.0 && !self.points.is_multiple_of(2)
    }

    /// Same span with (points − 1) doubled, keeping every existing sample.
    pub fn refined(&self) -> Self {
        Self { points: 2 * (self.points - 1) + 1, ..*self }
    }
}

/// Sampling of the two-photon spectrum: always an ω₋ axis, plus an ω₊ axis
/// for broadband pumps. 2D data is stored row-major with one row per ω₊ sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralGrid {
    pub minus: Axis,
    pub plus: Option<Axis>,
}

impl SpectralGrid {
    pub fn line(minus: Axis) -> Self {
        Self { minus, plus: None }
    }

    pub fn plane(plus: Axis, minus: Axis) -> Self {
        Self { minus, plus: Some(plus) }
    }

    pub fn is_2d(&self) -> bool {
        self.plus.is_some()
    }

    pub fn rows(&self) -> usize {
        self.plus.map_or(1, |a| a.points)
    }

    pub fn cols(&self) -> usize {
        self.minus.points
    }

    pub fn len(&self) -> usize {
        self.rows() * self.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Integration weight of one sample.
    pub fn cell(&self) -> f64 {
        self.minus.step() * self.plus.map_or(1.0, |a| a.step())
    }

    /// Largest step over all axes.
    pub fn coarsest_step(&self) -> f64 {
        let m = self.minus.step();
        self.plus.map_or(m, |a| a.step().max(m))
    }
}
