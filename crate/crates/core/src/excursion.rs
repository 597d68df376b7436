//! Gauss digitization of excursion sets.
//!
//! A [`BinaryImage`] marks the lattice points belonging to a set `A`; it
//! stands for the union of half-open pixels `x + eps [-1/2, 1/2)^2`
//! centred at the marked points.

use alloc::vec::Vec;

use crate::field::{BoundaryMode, FieldSample};
use crate::window::Window;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExcursionError {
    #[error("bit buffer has {got} entries, expected {rows}x{cols}")]
    DimensionMismatch {
        rows: usize,
        cols: usize,
        got: usize,
    },
    #[error("window clipping requires a bounded image")]
    TorusClip,
    #[error("window does not lie inside the image extent [{x0}, {x1}] x [{y0}, {y1}]")]
    WindowOutOfRange { x0: f64, x1: f64, y0: f64, y1: f64 },
}

/// Bitmask on a regular lattice, same layout as [`FieldSample`].
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryImage {
    rows: usize,
    cols: usize,
    spacing: f64,
    bits: Vec<bool>,
    boundary_mode: BoundaryMode,
    origin: (f64, f64),
}

impl BinaryImage {
    pub fn from_bits(
        rows: usize,
        cols: usize,
        spacing: f64,
        bits: Vec<bool>,
        boundary_mode: BoundaryMode,
        origin: (f64, f64),
    ) -> Result<Self, ExcursionError> {
        if bits.len() != rows * cols {
            return Err(ExcursionError::DimensionMismatch {
                rows,
                cols,
                got: bits.len(),
            });
        }
        Ok(Self {
            rows,
            cols,
            spacing,
            bits,
            boundary_mode,
            origin,
        })
    }

    /// Unit-spacing image from rows of `0`/`1`, first row is `y = 0`.
    ///
    /// # Panics
    /// On ragged rows.
    pub fn from_rows(rows: &[&[u8]], boundary_mode: BoundaryMode) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut bits = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            bits.extend(r.iter().map(|&b| b != 0));
        }
        Self::from_bits(rows.len(), cols, 1.0, bits, boundary_mode, (0.0, 0.0)).unwrap()
    }

    pub fn empty(rows: usize, cols: usize, spacing: f64, boundary_mode: BoundaryMode) -> Self {
        Self::filled(rows, cols, spacing, boundary_mode, false)
    }

    pub fn filled(
        rows: usize,
        cols: usize,
        spacing: f64,
        boundary_mode: BoundaryMode,
        value: bool,
    ) -> Self {
        Self {
            rows,
            cols,
            spacing,
            bits: alloc::vec![value; rows * cols],
            boundary_mode,
            origin: (0.0, 0.0),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn boundary_mode(&self) -> BoundaryMode {
        self.boundary_mode
    }

    pub fn origin(&self) -> (f64, f64) {
        self.origin
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn with_spacing(mut self, spacing: f64) -> Self {
        self.spacing = spacing;
        self
    }

    pub fn with_boundary_mode(mut self, mode: BoundaryMode) -> Self {
        self.boundary_mode = mode;
        self
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.bits[row * self.cols + col] = value;
    }

    /// Bit at a possibly out-of-range lattice position: wraps on the torus,
    /// background outside a bounded image.
    #[inline]
    pub fn at(&self, row: isize, col: isize) -> bool {
        let (rows, cols) = (self.rows as isize, self.cols as isize);
        if rows == 0 || cols == 0 {
            return false;
        }
        match self.boundary_mode {
            BoundaryMode::Torus => {
                let r = row.rem_euclid(rows) as usize;
                let c = col.rem_euclid(cols) as usize;
                self.bits[r * self.cols + c]
            }
            BoundaryMode::Bounded => {
                if row < 0 || col < 0 || row >= rows || col >= cols {
                    false
                } else {
                    self.bits[row as usize * self.cols + col as usize]
                }
            }
        }
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// `eps^2` times the number of set pixels.
    pub fn area(&self) -> f64 {
        self.count_ones() as f64 * self.spacing * self.spacing
    }

    pub fn complement(&self) -> Self {
        Self {
            bits: self.bits.iter().map(|b| !b).collect(),
            ..self.clone()
        }
    }

    /// Cyclic shift by `(drow, dcol)` lattice steps; content leaving a
    /// bounded image is dropped.
    pub fn translate(&self, drow: isize, dcol: isize) -> Self {
        let mut out = Self {
            bits: alloc::vec![false; self.bits.len()],
            ..self.clone()
        };
        for r in 0..self.rows {
            for c in 0..self.cols {
                let v = self.at(r as isize - drow, c as isize - dcol);
                out.bits[r * self.cols + c] = v;
            }
        }
        out
    }

    /// World rectangle covered by the pixels, `(x0, x1, y0, y1)`.
    pub fn extent(&self) -> (f64, f64, f64, f64) {
        let h = self.spacing;
        (
            self.origin.0 - h / 2.0,
            self.origin.0 + (self.cols as f64 - 0.5) * h,
            self.origin.1 - h / 2.0,
            self.origin.1 + (self.rows as f64 - 0.5) * h,
        )
    }

    /// Intersection with a window: pixels whose centre is outside `w` become
    /// background.
    pub fn clip_to_window(&self, w: &Window) -> Result<Self, ExcursionError> {
        if self.boundary_mode != BoundaryMode::Bounded {
            return Err(ExcursionError::TorusClip);
        }
        let (x0, x1, y0, y1) = self.extent();
        let bb = w.bounding_box();
        if bb.x0 < x0 || bb.x1 > x1 || bb.y0 < y0 || bb.y1 > y1 {
            return Err(ExcursionError::WindowOutOfRange { x0, x1, y0, y1 });
        }
        let mut out = self.clone();
        let h = self.spacing;
        for r in 0..self.rows {
            let y = self.origin.1 + r as f64 * h;
            for c in 0..self.cols {
                let x = self.origin.0 + c as f64 * h;
                if !w.contains(x, y) {
                    out.bits[r * self.cols + c] = false;
                }
            }
        }
        Ok(out)
    }

    /// Keeps every `stride`-th pixel in both directions.
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
        let (rows, cols) = (self.rows / stride, self.cols / stride);
        let mut bits = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                bits.push(self.bits[r * stride * self.cols + c * stride]);
            }
        }
        Self {
            rows,
            cols,
            spacing: self.spacing * stride as f64,
            bits,
            boundary_mode: self.boundary_mode,
            origin: self.origin,
        }
    }
}

/// Gauss digitization of the excursion set `{f <= level}`: a lattice point
/// is marked when the field value there is at most `level`.
pub fn digitize(field: &FieldSample, level: f64) -> BinaryImage {
    BinaryImage {
        rows: field.rows,
        cols: field.cols,
        spacing: field.spacing,
        bits: field.values.iter().map(|&v| v <= level).collect(),
        boundary_mode: field.boundary_mode,
        origin: field.origin,
    }
}
