//! Scalar fields sampled on a regular square lattice.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::covariance::CovarianceModel;

/// How the lattice is closed at its edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum BoundaryMode {
    /// Periodic in both directions.
    Torus,
    /// Everything outside the lattice is background.
    #[default]
    Bounded,
}

impl BoundaryMode {
    pub fn name(self) -> &'static str {
        match self {
            Self::Torus => "torus",
            Self::Bounded => "bounded",
        }
    }
}

impl fmt::Display for BoundaryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundaryMode {
    type Err = alloc::string::String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "torus" => Ok(Self::Torus),
            "bounded" => Ok(Self::Bounded),
            other => Err(alloc::format!(
                "unknown boundary mode '{other}' (expected torus or bounded)"
            )),
        }
    }
}

/// Field values on an `rows x cols` lattice of spacing `spacing`.
///
/// `values[r * cols + c]` is the value at world point
/// `(origin.0 + c * spacing, origin.1 + r * spacing)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    pub rows: usize,
    pub cols: usize,
    pub spacing: f64,
    pub values: Vec<f64>,
    pub boundary_mode: BoundaryMode,
    /// World coordinates of the lattice point `(0, 0)`.
    pub origin: (f64, f64),
    pub seed: u64,
    /// `None` for deterministic test fields.
    pub model: Option<CovarianceModel>,
}

impl FieldSample {
    /// Samples `f` at the lattice points.
    pub fn from_fn(
        rows: usize,
        cols: usize,
        spacing: f64,
        origin: (f64, f64),
        boundary_mode: BoundaryMode,
        f: impl Fn(f64, f64) -> f64,
    ) -> Self {
        let mut values = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let y = origin.1 + r as f64 * spacing;
            for c in 0..cols {
                values.push(f(origin.0 + c as f64 * spacing, y));
            }
        }
        Self {
            rows,
            cols,
            spacing,
            values,
            boundary_mode,
            origin,
            seed: 0,
            model: None,
        }
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// World rectangle covered by the lattice pixels `[x0, x1] x [y0, y1]`.
    pub fn extent(&self) -> (f64, f64, f64, f64) {
        let h = self.spacing;
        (
            self.origin.0 - h / 2.0,
            self.origin.0 + (self.cols as f64 - 0.5) * h,
            self.origin.1 - h / 2.0,
            self.origin.1 + (self.rows as f64 - 0.5) * h,
        )
    }

    /// Keeps every `stride`-th lattice point in both directions, starting
    /// at `(0, 0)`. The spacing grows by `stride`.
    ///
    /// # Panics
    /// If `stride` is zero or does not divide both dimensions.
    pub fn subsample(&self, stride: usize) -> Self {
        assert!(
            stride > 0 && self.rows.is_multiple_of(stride) && self.cols.is_multiple_of(stride),
            "stride {stride} must divide {}x{}",
            self.rows,
            self.cols
        );
        let rows = self.rows / stride;
        let cols = self.cols / stride;
        let mut values = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                values.push(self.get(r * stride, c * stride));
            }
        }
        Self {
            rows,
            cols,
            spacing: self.spacing * stride as f64,
            values,
            boundary_mode: self.boundary_mode,
            origin: self.origin,
            seed: self.seed,
            model: self.model,
        }
    }
}
