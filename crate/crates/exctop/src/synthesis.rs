//! Stationary Gaussian field synthesis.
//!
//! Torus fields are exact circulant-embedding samples: the covariance is
//! the periodically wrapped model covariance, its 2-D DFT gives the
//! circulant spectrum, and a field is the real part of the DFT of
//! spectrally scaled complex white noise. Bounded fields are cropped from
//! a torus enlarged by `max(3 l, 10 eps)` on every side.
//!
//! [`sample_field_dense`] draws the same laws through a Cholesky factor of
//! the full covariance matrix; it exists to check the FFT route.

use std::sync::Arc;

use exctop_core::{BoundaryMode, CovarianceModel, FieldSample};
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

use crate::rng;

/// Relative size of negative circulant eigenvalues that are clamped to 0.
pub const SPECTRUM_TOLERANCE: f64 = 1e-9;
/// Diagonal jitter of the dense covariance matrix.
pub const DENSE_JITTER: f64 = 1e-10;
pub const MIN_SIDE: usize = 8;
pub const MAX_DENSE_POINTS: usize = 32 * 32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthesisError {
    #[error("grid {rows}x{cols} is too small (need at least {MIN_SIDE}x{MIN_SIDE})")]
    GridTooSmall { rows: usize, cols: usize },
    #[error("dense sampling supports at most {MAX_DENSE_POINTS} points, got {rows}x{cols}")]
    GridTooLarge { rows: usize, cols: usize },
    #[error("spacing must be positive and finite, got {0}")]
    BadSpacing(f64),
    #[error(
        "circulant spectrum has a negative eigenvalue {min} (max {max}); enlarge the domain relative to the length scale"
    )]
    Embedding { min: f64, max: f64 },
    #[error("covariance matrix is not positive definite at pivot {pivot}")]
    Factorization { pivot: usize },
}

/// Covariance between two lattice points separated by `(drow, dcol)`
/// pixels on a torus of `rows x cols` pixels: sum over periodic images.
fn wrapped_cov(
    model: &CovarianceModel,
    rows: usize,
    cols: usize,
    eps: f64,
    images: i64,
    drow: i64,
    dcol: i64,
) -> f64 {
    let mut acc = 0.0;
    for a in -images..=images {
        let dy = (drow + a * rows as i64) as f64 * eps;
        for b in -images..=images {
            let dx = (dcol + b * cols as i64) as f64 * eps;
            acc += model.reduced_cov((dx * dx + dy * dy).sqrt());
        }
    }
    acc
}

/// Number of periodic images needed on each side so that omitted terms are
/// below `1e-17`.
fn image_count(model: &CovarianceModel, rows: usize, cols: usize, eps: f64) -> i64 {
    let period = rows.min(cols) as f64 * eps;
    let mut k = 1;
    while k < 64 && model.reduced_cov(k as f64 * period) > 1e-17 {
        k += 1;
    }
    k
}

fn fft2(
    data: &mut [Complex64],
    rows: usize,
    cols: usize,
    row_fft: &dyn Fft<f64>,
    col_fft: &dyn Fft<f64>,
) {
    for row in data.chunks_exact_mut(cols) {
        row_fft.process(row);
    }
    let mut column = vec![Complex64::new(0.0, 0.0); rows];
    for c in 0..cols {
        for r in 0..rows {
            column[r] = data[r * cols + c];
        }
        col_fft.process(&mut column);
        for r in 0..rows {
            data[r * cols + c] = column[r];
        }
    }
}

/// Precomputed circulant square-root spectrum for repeated sampling with
/// the same model and grid.
#[derive(Clone)]
pub struct FieldSampler {
    model: CovarianceModel,
    rows: usize,
    cols: usize,
    eps: f64,
    mode: BoundaryMode,
    // torus actually sampled (enlarged in bounded mode) and crop offset
    torus_rows: usize,
    torus_cols: usize,
    pad: usize,
    sqrt_spectrum: Arc<Vec<f64>>,
    row_fft: Arc<dyn Fft<f64>>,
    col_fft: Arc<dyn Fft<f64>>,
    origin: (f64, f64),
    clamped: usize,
}

impl std::fmt::Debug for FieldSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FieldSampler")
            .field("model", &self.model)
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("eps", &self.eps)
            .field("mode", &self.mode)
            .field("torus", &(self.torus_rows, self.torus_cols))
            .finish()
    }
}

impl FieldSampler {
    pub fn new(
        model: CovarianceModel,
        rows: usize,
        cols: usize,
        eps: f64,
        mode: BoundaryMode,
    ) -> Result<Self, SynthesisError> {
        if rows < MIN_SIDE || cols < MIN_SIDE {
            return Err(SynthesisError::GridTooSmall { rows, cols });
        }
        if !(eps.is_finite() && eps > 0.0) {
            return Err(SynthesisError::BadSpacing(eps));
        }
        let pad = match mode {
            BoundaryMode::Torus => 0,
            BoundaryMode::Bounded => {
                let margin = (3.0 * model.length_scale).max(10.0 * eps);
                (margin / eps).ceil() as usize
            }
        };
        let (tr, tc) = (rows + 2 * pad, cols + 2 * pad);
        let images = image_count(&model, tr, tc, eps);
        let mut data = Vec::with_capacity(tr * tc);
        for r in 0..tr as i64 {
            for c in 0..tc as i64 {
                let cov = wrapped_cov(&model, tr, tc, eps, images, r, c);
                data.push(Complex64::new(cov, 0.0));
            }
        }
        let mut planner = FftPlanner::new();
        let row_fft = planner.plan_fft_forward(tc);
        let col_fft = planner.plan_fft_forward(tr);
        fft2(&mut data, tr, tc, row_fft.as_ref(), col_fft.as_ref());
        let max = data.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        let min = data.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        if min < -SPECTRUM_TOLERANCE * max {
            return Err(SynthesisError::Embedding { min, max });
        }
        let n = (tr * tc) as f64;
        let mut clamped = 0;
        let sqrt_spectrum = data
            .iter()
            .map(|z| {
                if z.re < 0.0 {
                    clamped += 1;
                }
                (z.re.max(0.0) / n).sqrt()
            })
            .collect();
        Ok(Self {
            model,
            rows,
            cols,
            eps,
            mode,
            torus_rows: tr,
            torus_cols: tc,
            pad,
            sqrt_spectrum: Arc::new(sqrt_spectrum),
            row_fft,
            col_fft,
            origin: (eps / 2.0, eps / 2.0),
            clamped,
        })
    }

    /// Places lattice point `(0, 0)` at `origin` (world coordinates).
    pub fn with_origin(mut self, origin: (f64, f64)) -> Self {
        self.origin = origin;
        self
    }

    pub fn model(&self) -> CovarianceModel {
        self.model
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn spacing(&self) -> f64 {
        self.eps
    }

    pub fn boundary_mode(&self) -> BoundaryMode {
        self.mode
    }

    /// Dimensions of the torus actually sampled.
    pub fn torus_dims(&self) -> (usize, usize) {
        (self.torus_rows, self.torus_cols)
    }

    /// Number of slightly negative eigenvalues that were clamped to zero.
    pub fn clamped_eigenvalues(&self) -> usize {
        self.clamped
    }

    pub fn sample(&self, seed: u64) -> FieldSample {
        let (tr, tc) = (self.torus_rows, self.torus_cols);
        let mut rng = rng::stream(seed);
        let mut data: Vec<Complex64> = self
            .sqrt_spectrum
            .iter()
            .map(|&s| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(s * re, s * im)
            })
            .collect();
        fft2(
            &mut data,
            tr,
            tc,
            self.row_fft.as_ref(),
            self.col_fft.as_ref(),
        );
        let mut values = Vec::with_capacity(self.rows * self.cols);
        for r in 0..self.rows {
            let base = (r + self.pad) * tc + self.pad;
            values.extend(data[base..base + self.cols].iter().map(|z| z.re));
        }
        FieldSample {
            rows: self.rows,
            cols: self.cols,
            spacing: self.eps,
            values,
            boundary_mode: self.mode,
            origin: self.origin,
            seed,
            model: Some(self.model),
        }
    }
}

/// One stationary Gaussian field on a `rows x cols` lattice.
pub fn sample_field(
    model: CovarianceModel,
    dims: (usize, usize),
    eps: f64,
    seed: u64,
    mode: BoundaryMode,
) -> Result<FieldSample, SynthesisError> {
    Ok(FieldSampler::new(model, dims.0, dims.1, eps, mode)?.sample(seed))
}

/// Model covariance between lattice points `a` and `b` (row, col) as used by
/// [`sample_field`] in the given mode.
pub fn lattice_covariance(
    model: &CovarianceModel,
    dims: (usize, usize),
    eps: f64,
    mode: BoundaryMode,
    a: (usize, usize),
    b: (usize, usize),
) -> f64 {
    let drow = b.0 as i64 - a.0 as i64;
    let dcol = b.1 as i64 - a.1 as i64;
    match mode {
        BoundaryMode::Bounded => {
            let (dy, dx) = (drow as f64 * eps, dcol as f64 * eps);
            model.reduced_cov((dx * dx + dy * dy).sqrt())
        }
        BoundaryMode::Torus => {
            let images = image_count(model, dims.0, dims.1, eps);
            wrapped_cov(model, dims.0, dims.1, eps, images, drow, dcol)
        }
    }
}

/// Lower Cholesky factor (row-major, `n x n`) of a symmetric matrix.
fn cholesky(mut a: Vec<f64>, n: usize) -> Result<Vec<f64>, SynthesisError> {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if d.is_nan() || d <= 0.0 {
            return Err(SynthesisError::Factorization { pivot: j });
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
        for k in j + 1..n {
            a[j * n + k] = 0.0;
        }
    }
    Ok(a)
}

/// Exact sample through a Cholesky factor of the full covariance matrix
/// (at most 32x32 points; no size floor).
pub fn sample_field_dense(
    model: CovarianceModel,
    dims: (usize, usize),
    eps: f64,
    seed: u64,
    mode: BoundaryMode,
) -> Result<FieldSample, SynthesisError> {
    let (rows, cols) = dims;
    let n = rows * cols;
    if n > MAX_DENSE_POINTS {
        return Err(SynthesisError::GridTooLarge { rows, cols });
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(SynthesisError::BadSpacing(eps));
    }
    let mut cov = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let c = lattice_covariance(
                &model,
                dims,
                eps,
                mode,
                (i / cols, i % cols),
                (j / cols, j % cols),
            );
            cov[i * n + j] = c;
            cov[j * n + i] = c;
        }
        cov[i * n + i] += DENSE_JITTER;
    }
    let l = cholesky(cov, n)?;
    let mut rng = rng::stream(seed);
    let z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let values = (0..n)
        .map(|i| (0..=i).map(|k| l[i * n + k] * z[k]).sum())
        .collect();
    Ok(FieldSample {
        rows,
        cols,
        spacing: eps,
        values,
        boundary_mode: mode,
        origin: (eps / 2.0, eps / 2.0),
        seed,
        model: Some(model),
    })
}
