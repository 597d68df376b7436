//! Digital topology of binary images.
//!
//! [`chi_bicov`] is the three-point configuration estimator of the Euler
//! characteristic. The other counts are independent oracles:
//! [`chi_complex`] evaluates `V - E + S` on the 4-adjacency pixel complex,
//! and [`components`] / [`holes`] count connected components by union-find.
//! For every image
//!
//! ```text
//! chi_bicov = chi_complex - anti_count
//! chi_complex = components(4) - holes        (bounded images)
//! ```
//!
//! where `anti_count` is the number of 2x2 cells holding only their
//! top-left and bottom-right pixels. The configuration sum therefore joins
//! anti-diagonal neighbours and splits main-diagonal ones.
//!
//! Bounded images are surrounded by background; torus images wrap.

use alloc::vec::Vec;

use crate::excursion::BinaryImage;
use crate::field::BoundaryMode;
use crate::union_find::DisjointSet;

/// Raw tallies of the two three-point configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConfigCounts {
    /// Set pixels whose right and upper neighbours are unset.
    pub n_plus: u64,
    /// Unset pixels whose left and lower neighbours are set.
    pub n_minus: u64,
}

impl ConfigCounts {
    pub fn chi(&self) -> i64 {
        self.n_plus as i64 - self.n_minus as i64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Adjacency {
    Four,
    Eight,
}

/// Lattice displacement `(dx, dy)` in pixels; `dx` runs along `u1`
/// (columns) and `dy` along `u2` (rows).
pub type LatticeShift = (isize, isize);

#[inline]
fn bit(img: &BinaryImage, x: isize, y: isize) -> bool {
    img.at(y, x)
}

/// Range of lattice coordinates a scan must visit: bounded images get one
/// ring of virtual background so sums cover all of the lattice.
fn scan_range(img: &BinaryImage) -> (core::ops::Range<isize>, core::ops::Range<isize>) {
    let (rows, cols) = (img.rows() as isize, img.cols() as isize);
    match img.boundary_mode() {
        BoundaryMode::Torus => (0..rows, 0..cols),
        BoundaryMode::Bounded => (-1..rows + 1, -1..cols + 1),
    }
}

pub fn config_counts(img: &BinaryImage) -> ConfigCounts {
    let (row_range, col_range) = scan_range(img);
    let mut counts = ConfigCounts::default();
    for y in row_range {
        for x in col_range.clone() {
            if bit(img, x, y) {
                if !bit(img, x + 1, y) && !bit(img, x, y + 1) {
                    counts.n_plus += 1;
                }
            } else if bit(img, x - 1, y) && bit(img, x, y - 1) {
                counts.n_minus += 1;
            }
        }
    }
    counts
}

/// Euler characteristic estimate `N+ - N-`.
pub fn chi_bicov(img: &BinaryImage) -> i64 {
    config_counts(img).chi()
}

/// `V - E + S` of the pixel complex: set pixels, 4-adjacent set pairs and
/// fully set 2x2 blocks.
pub fn chi_complex(img: &BinaryImage) -> i64 {
    let (mut v, mut e, mut s) = (0i64, 0i64, 0i64);
    for y in 0..img.rows() as isize {
        for x in 0..img.cols() as isize {
            if !bit(img, x, y) {
                continue;
            }
            v += 1;
            let right = bit(img, x + 1, y);
            let up = bit(img, x, y + 1);
            e += right as i64 + up as i64;
            if right && up && bit(img, x + 1, y + 1) {
                s += 1;
            }
        }
    }
    v - e + s
}

/// Checkerboard 2x2 cells: `(anti, main)` where anti cells hold exactly the
/// top-left and bottom-right pixels and main cells exactly the bottom-left
/// and top-right ones.
pub fn checkerboard_cells(img: &BinaryImage) -> (u64, u64) {
    let (mut anti, mut main) = (0u64, 0u64);
    for y in 0..img.rows() as isize {
        for x in 0..img.cols() as isize {
            let bl = bit(img, x, y);
            let br = bit(img, x + 1, y);
            let tl = bit(img, x, y + 1);
            let tr = bit(img, x + 1, y + 1);
            if tl && br && !bl && !tr {
                anti += 1;
            } else if bl && tr && !br && !tl {
                main += 1;
            }
        }
    }
    (anti, main)
}

fn label_count(img: &BinaryImage, value: bool, adjacency: Adjacency, padded: bool) -> usize {
    // padded: bounded image embedded in a one-pixel background ring
    let pad = padded as isize;
    let rows = img.rows() as isize + 2 * pad;
    let cols = img.cols() as isize + 2 * pad;
    let wrap = img.boundary_mode() == BoundaryMode::Torus && !padded;
    let at = |y: isize, x: isize| -> bool { img.at(y - pad, x - pad) };
    let mut ds = DisjointSet::new((rows * cols) as usize);
    let idx = |y: isize, x: isize| -> Option<usize> {
        if wrap {
            Some((y.rem_euclid(rows) * cols + x.rem_euclid(cols)) as usize)
        } else if y < 0 || x < 0 || y >= rows || x >= cols {
            None
        } else {
            Some((y * cols + x) as usize)
        }
    };
    let forward: &[(isize, isize)] = match adjacency {
        Adjacency::Four => &[(0, 1), (1, 0)],
        Adjacency::Eight => &[(0, 1), (1, 0), (1, 1), (1, -1)],
    };
    let mut members = Vec::new();
    for y in 0..rows {
        for x in 0..cols {
            if at(y, x) != value {
                continue;
            }
            let here = (y * cols + x) as usize;
            members.push(here);
            for &(dy, dx) in forward {
                if let Some(there) = idx(y + dy, x + dx) {
                    let (ty, tx) = ((there as isize) / cols, (there as isize) % cols);
                    if at(ty, tx) == value {
                        ds.union(here, there);
                    }
                }
            }
        }
    }
    let mut roots: Vec<usize> = members.iter().map(|&m| ds.find(m)).collect();
    roots.sort_unstable();
    roots.dedup();
    roots.len()
}

/// Number of connected components of the set pixels.
pub fn components(img: &BinaryImage, adjacency: Adjacency) -> usize {
    label_count(img, true, adjacency, false)
}

/// Number of holes: 8-connected background components that are not the
/// unbounded outer face. On a torus there is no outer face; the count is
/// background components minus one when background exists.
pub fn holes(img: &BinaryImage) -> usize {
    match img.boundary_mode() {
        BoundaryMode::Bounded => {
            // the ring pixel (0, 0) is always background and always present
            label_count(img, false, Adjacency::Eight, true) - 1
        }
        BoundaryMode::Torus => label_count(img, false, Adjacency::Eight, false).saturating_sub(1),
    }
}

/// Pixel boundary crossings `(#flips along u1, #flips along u2)`.
pub fn flip_counts(img: &BinaryImage) -> (u64, u64) {
    let (row_range, col_range) = scan_range(img);
    let (mut f1, mut f2) = (0u64, 0u64);
    for y in row_range {
        for x in col_range.clone() {
            let b = bit(img, x, y);
            f1 += (b != bit(img, x + 1, y)) as u64;
            f2 += (b != bit(img, x, y + 1)) as u64;
        }
    }
    (f1, f2)
}

/// `(per_u1, per_u2, per_inf)`: `eps` times the number of pixel pairs
/// `(x, x + u_i)` with different bits. Both crossing orientations count.
pub fn perimeter_inf(img: &BinaryImage) -> (f64, f64, f64) {
    let (f1, f2) = flip_counts(img);
    let h = img.spacing();
    let (p1, p2) = (f1 as f64 * h, f2 as f64 * h);
    (p1, p2, p1 + p2)
}

pub fn area(img: &BinaryImage) -> f64 {
    img.area()
}

/// Lattice polyvariogram: `eps^2 * #{x : bit(x - s) = 1 for s in in_shifts,
/// bit(x - t) = 0 for t in out_shifts}`.
///
/// A bounded image with no `in_shifts` gives an infinite volume.
pub fn polyvariogram(
    img: &BinaryImage,
    in_shifts: &[LatticeShift],
    out_shifts: &[LatticeShift],
) -> f64 {
    let h2 = img.spacing() * img.spacing();
    let test = |x: isize, y: isize| -> bool {
        in_shifts.iter().all(|&(sx, sy)| bit(img, x - sx, y - sy))
            && out_shifts.iter().all(|&(tx, ty)| !bit(img, x - tx, y - ty))
    };
    let mut count = 0u64;
    match (img.boundary_mode(), in_shifts.first()) {
        (BoundaryMode::Torus, _) => {
            for y in 0..img.rows() as isize {
                for x in 0..img.cols() as isize {
                    count += test(x, y) as u64;
                }
            }
        }
        (BoundaryMode::Bounded, None) => return f64::INFINITY,
        (BoundaryMode::Bounded, Some(&(sx, sy))) => {
            // x - s0 must be a set pixel of the image
            for y in 0..img.rows() as isize {
                for x in 0..img.cols() as isize {
                    count += test(x + sx, y + sy) as u64;
                }
            }
        }
    }
    count as f64 * h2
}

/// All digital functionals of one image.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TopologyReport {
    pub rows: usize,
    pub cols: usize,
    pub spacing: f64,
    pub boundary_mode: BoundaryMode,
    pub chi_bicov: i64,
    pub chi_complex: i64,
    pub components_4: usize,
    pub components_8: usize,
    pub holes_8: usize,
    /// Holes on a torus are background components minus one, not holes of
    /// a planar set.
    pub torus_semantics: bool,
    pub per_u1: f64,
    pub per_u2: f64,
    pub per_inf: f64,
    pub area: f64,
    pub checkerboard_anti: u64,
    pub checkerboard_main: u64,
    pub config_counts: ConfigCounts,
}

impl TopologyReport {
    pub fn measure(img: &BinaryImage) -> Self {
        let config_counts = config_counts(img);
        let (per_u1, per_u2, per_inf) = perimeter_inf(img);
        let (anti, main) = checkerboard_cells(img);
        Self {
            rows: img.rows(),
            cols: img.cols(),
            spacing: img.spacing(),
            boundary_mode: img.boundary_mode(),
            chi_bicov: config_counts.chi(),
            chi_complex: chi_complex(img),
            components_4: components(img, Adjacency::Four),
            components_8: components(img, Adjacency::Eight),
            holes_8: holes(img),
            torus_semantics: img.boundary_mode() == BoundaryMode::Torus,
            per_u1,
            per_u2,
            per_inf,
            area: img.area(),
            checkerboard_anti: anti,
            checkerboard_main: main,
            config_counts,
        }
    }

    pub fn checkerboard_cells(&self) -> u64 {
        self.checkerboard_anti + self.checkerboard_main
    }
}
