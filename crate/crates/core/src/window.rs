//! Polyrectangle observation windows.
//!
//! A [`Window`] is a finite union of closed axis-aligned rectangles, no two
//! of which share a corner point. Overlaps are allowed. All functionals are
//! computed exactly on the grid spanned by the distinct rectangle
//! coordinates, where the union is a union of whole cells.

use alloc::vec::Vec;

use crate::excursion::BinaryImage;
use crate::field::BoundaryMode;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WindowError {
    #[error("window has no rectangles")]
    Empty,
    #[error("rectangle {index} has non-finite coordinates")]
    NonFinite { index: usize },
    #[error("rectangle {index} is empty or degenerate: [{x0}, {x1}] x [{y0}, {y1}]")]
    Degenerate {
        index: usize,
        x0: f64,
        x1: f64,
        y0: f64,
        y1: f64,
    },
    #[error("rectangles {first} and {second} share the corner ({x}, {y})")]
    SharedCorner {
        first: usize,
        second: usize,
        x: f64,
        y: f64,
    },
}

/// Closed rectangle `[x0, x1] x [y0, y1]` in world units.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub const fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { x0, x1, y0, y1 }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn corners(&self) -> [(f64, f64); 4] {
        [
            (self.x0, self.y0),
            (self.x1, self.y0),
            (self.x0, self.y1),
            (self.x1, self.y1),
        ]
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.x0 <= x && x <= self.x1 && self.y0 <= y && y <= self.y1
    }
}

/// Polyrectangle: union of rectangles with pairwise-disjoint corner sets.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    rects: Vec<Rect>,
}

impl Window {
    pub fn new(rects: Vec<Rect>) -> Result<Self, WindowError> {
        if rects.is_empty() {
            return Err(WindowError::Empty);
        }
        for (index, r) in rects.iter().enumerate() {
            if ![r.x0, r.x1, r.y0, r.y1].iter().all(|v| v.is_finite()) {
                return Err(WindowError::NonFinite { index });
            }
            if !(r.x1 > r.x0 && r.y1 > r.y0) {
                return Err(WindowError::Degenerate {
                    index,
                    x0: r.x0,
                    x1: r.x1,
                    y0: r.y0,
                    y1: r.y1,
                });
            }
        }
        for (i, a) in rects.iter().enumerate() {
            for (j, b) in rects.iter().enumerate().skip(i + 1) {
                for ca in a.corners() {
                    if b.corners().contains(&ca) {
                        return Err(WindowError::SharedCorner {
                            first: i,
                            second: j,
                            x: ca.0,
                            y: ca.1,
                        });
                    }
                }
            }
        }
        Ok(Self { rects })
    }

    pub fn rect(r: Rect) -> Result<Self, WindowError> {
        Self::new(alloc::vec![r])
    }

    pub fn rects(&self) -> &[Rect] {
        &self.rects
    }

    /// Smallest rectangle containing the window.
    pub fn bounding_box(&self) -> Rect {
        let mut bb = self.rects[0];
        for r in &self.rects[1..] {
            bb.x0 = bb.x0.min(r.x0);
            bb.x1 = bb.x1.max(r.x1);
            bb.y0 = bb.y0.min(r.y0);
            bb.y1 = bb.y1.max(r.y1);
        }
        bb
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.rects.iter().any(|r| r.contains(x, y))
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Self {
        Self {
            rects: self
                .rects
                .iter()
                .map(|r| Rect::new(r.x0 + dx, r.x1 + dx, r.y0 + dy, r.y1 + dy))
                .collect(),
        }
    }

    /// Rotation by a quarter turn counter-clockwise about the origin.
    pub fn rotate_quarter(&self) -> Self {
        Self {
            rects: self
                .rects
                .iter()
                .map(|r| Rect::new(-r.y1, -r.y0, r.x0, r.x1))
                .collect(),
        }
    }

    pub fn vol(&self) -> f64 {
        let g = CellGrid::new(self);
        let mut area = 0.0;
        for j in 0..g.ny() {
            for i in 0..g.nx() {
                if g.covered(i as isize, j as isize) {
                    area += g.cell_width(i) * g.cell_height(j);
                }
            }
        }
        area
    }

    /// Directional variational perimeter. `direction` is 1 (`u1`, the
    /// total length of boundary edges orthogonal to the x axis) or 2.
    ///
    /// # Panics
    /// If `direction` is not 1 or 2.
    pub fn per_u(&self, direction: u8) -> f64 {
        let g = CellGrid::new(self);
        let mut length = 0.0;
        match direction {
            1 => {
                for j in 0..g.ny() as isize {
                    for i in 0..=g.nx() as isize {
                        if g.covered(i - 1, j) != g.covered(i, j) {
                            length += g.cell_height(j as usize);
                        }
                    }
                }
            }
            2 => {
                for i in 0..g.nx() as isize {
                    for j in 0..=g.ny() as isize {
                        if g.covered(i, j - 1) != g.covered(i, j) {
                            length += g.cell_width(i as usize);
                        }
                    }
                }
            }
            _ => panic!("direction must be 1 or 2, got {direction}"),
        }
        length
    }

    pub fn per_inf(&self) -> f64 {
        self.per_u(1) + self.per_u(2)
    }

    /// Euler characteristic of the (closed) union, as vertices minus edges
    /// plus faces of the cell complex it spans.
    pub fn euler(&self) -> i64 {
        let g = CellGrid::new(self);
        let (nx, ny) = (g.nx() as isize, g.ny() as isize);
        let mut faces = 0i64;
        let mut edges = 0i64;
        let mut vertices = 0i64;
        for j in 0..ny {
            for i in 0..nx {
                faces += g.covered(i, j) as i64;
            }
        }
        // vertical edges on line x_i, spanning row j
        for j in 0..ny {
            for i in 0..=nx {
                edges += (g.covered(i - 1, j) || g.covered(i, j)) as i64;
            }
        }
        for i in 0..nx {
            for j in 0..=ny {
                edges += (g.covered(i, j - 1) || g.covered(i, j)) as i64;
            }
        }
        for j in 0..=ny {
            for i in 0..=nx {
                let touched = g.covered(i - 1, j - 1)
                    || g.covered(i, j - 1)
                    || g.covered(i - 1, j)
                    || g.covered(i, j);
                vertices += touched as i64;
            }
        }
        vertices - edges + faces
    }

    /// Number of apparent corners of the boundary.
    pub fn corner_count(&self) -> usize {
        let g = CellGrid::new(self);
        let (nx, ny) = (g.nx() as isize, g.ny() as isize);
        let mut corners = 0;
        for j in 0..=ny {
            for i in 0..=nx {
                let ll = g.covered(i - 1, j - 1);
                let lr = g.covered(i, j - 1);
                let ul = g.covered(i - 1, j);
                let ur = g.covered(i, j);
                let n = ll as u8 + lr as u8 + ul as u8 + ur as u8;
                corners += match n {
                    1 | 3 => 1,
                    2 if ll == ur => 2,
                    _ => 0,
                };
            }
        }
        corners
    }

    /// Rasterizes the window with square pixels of side `h`, a pixel being
    /// set when its centre lies in the window. Pixel `(0, 0)` is centred at
    /// the lower-left corner of the bounding box shifted by `h/2`, with one
    /// ring of empty pixels around the box.
    pub fn rasterize(&self, h: f64) -> BinaryImage {
        let bb = self.bounding_box();
        let cols = libm::ceil(bb.width() / h) as usize + 2;
        let rows = libm::ceil(bb.height() / h) as usize + 2;
        let ox = bb.x0 - h + h / 2.0;
        let oy = bb.y0 - h + h / 2.0;
        let mut bits = alloc::vec![false; rows * cols];
        for r in 0..rows {
            let y = oy + r as f64 * h;
            for c in 0..cols {
                let x = ox + c as f64 * h;
                bits[r * cols + c] = self.contains(x, y);
            }
        }
        BinaryImage::from_bits(rows, cols, h, bits, BoundaryMode::Bounded, (ox, oy))
            .expect("dimensions match by construction")
    }
}

/// Union of a window's rectangles on the grid of its distinct coordinates.
struct CellGrid {
    xs: Vec<f64>,
    ys: Vec<f64>,
    cover: Vec<bool>,
}

impl CellGrid {
    fn new(w: &Window) -> Self {
        let mut xs: Vec<f64> = w.rects.iter().flat_map(|r| [r.x0, r.x1]).collect();
        let mut ys: Vec<f64> = w.rects.iter().flat_map(|r| [r.y0, r.y1]).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        ys.sort_by(f64::total_cmp);
        ys.dedup();
        let (nx, ny) = (xs.len() - 1, ys.len() - 1);
        let mut cover = alloc::vec![false; nx * ny];
        for r in &w.rects {
            let i0 = xs.partition_point(|&x| x < r.x0);
            let i1 = xs.partition_point(|&x| x < r.x1);
            let j0 = ys.partition_point(|&y| y < r.y0);
            let j1 = ys.partition_point(|&y| y < r.y1);
            for j in j0..j1 {
                for i in i0..i1 {
                    cover[j * nx + i] = true;
                }
            }
        }
        Self { xs, ys, cover }
    }

    fn nx(&self) -> usize {
        self.xs.len() - 1
    }

    fn ny(&self) -> usize {
        self.ys.len() - 1
    }

    fn cell_width(&self, i: usize) -> f64 {
        self.xs[i + 1] - self.xs[i]
    }

    fn cell_height(&self, j: usize) -> f64 {
        self.ys[j + 1] - self.ys[j]
    }

    fn covered(&self, i: isize, j: isize) -> bool {
        if i < 0 || j < 0 || i >= self.nx() as isize || j >= self.ny() as isize {
            return false;
        }
        self.cover[j as usize * self.nx() + i as usize]
    }
}
