//! Monte Carlo harness: replicate fields, measure digital functionals,
//! aggregate with standard errors and compare with the closed forms.
//!
//! Torus runs estimate densities (counts divided by the torus area) and are
//! compared with the Gaussian densities. Bounded runs measure totals of
//! `F n W` and are compared with the window decomposition.

use exctop_core::closed_form::{self, expected_functionals, paper_phi, PhiConvention};
use exctop_core::excursion::{digitize, BinaryImage, ExcursionError};
use exctop_core::topology::{self, Adjacency};
use exctop_core::{BoundaryMode, CovarianceModel, FieldSample, Rect, RegularityError, Window};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::replicate_seed;
use crate::stats::{z_score, IntMoments};
use crate::synthesis::{FieldSampler, SynthesisError};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "EXCTOP_THREADS";

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment configuration:\n  - {}", .0.join("\n  - "))]
    Config(Vec<String>),
    #[error(transparent)]
    Synthesis(#[from] SynthesisError),
    #[error(transparent)]
    Regularity(#[from] RegularityError),
    #[error(transparent)]
    Excursion(#[from] ExcursionError),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum FieldSource {
    /// Stationary Gaussian field of the configured covariance model.
    #[default]
    Gaussian,
    /// Deterministic `sin(2 pi x) sin(2 pi y)`.
    SineProduct,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub source: FieldSource,
    pub model: Option<CovarianceModel>,
    /// Use the spectral moment of models without `C^{1,1}` paths.
    pub allow_irregular: bool,
    pub lambdas: Vec<f64>,
    /// `(rows, cols)`
    pub dims: (usize, usize),
    pub eps: f64,
    pub replicates: usize,
    pub seed: u64,
    pub mode: BoundaryMode,
    /// World coordinates of the lower-left corner of the field extent.
    pub origin: (f64, f64),
    pub windows: Vec<Window>,
    /// Coarser spacings for the convergence sweep, integer multiples of `eps`.
    pub sweep_eps: Vec<f64>,
    pub threads: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            source: FieldSource::Gaussian,
            model: None,
            allow_irregular: false,
            lambdas: Vec::new(),
            dims: (0, 0),
            eps: 0.0,
            replicates: 0,
            seed: 0,
            mode: BoundaryMode::Torus,
            origin: (0.0, 0.0),
            windows: Vec::new(),
            sweep_eps: Vec::new(),
            threads: None,
        }
    }
}

impl ExperimentConfig {
    /// Field extent `[x0, x1] x [y0, y1]`.
    pub fn extent(&self) -> Rect {
        Rect::new(
            self.origin.0,
            self.origin.0 + self.dims.1 as f64 * self.eps,
            self.origin.1,
            self.origin.1 + self.dims.0 as f64 * self.eps,
        )
    }

    /// Every violated constraint, one message each.
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let mut errs = Vec::new();
        if self.replicates < 2 {
            errs.push(format!(
                "replicates: must be at least 2, got {}",
                self.replicates
            ));
        }
        if self.lambdas.is_empty() {
            errs.push("lambdas: must list at least one level".into());
        }
        if self.lambdas.iter().any(|l| !l.is_finite()) {
            errs.push("lambdas: every level must be finite".into());
        }
        if !(self.eps.is_finite() && self.eps > 0.0) {
            errs.push(format!("eps: must be positive, got {}", self.eps));
        }
        if self.dims.0 < 8 || self.dims.1 < 8 {
            errs.push(format!(
                "dims: need at least 8x8, got {}x{}",
                self.dims.0, self.dims.1
            ));
        }
        if self.source == FieldSource::Gaussian && self.model.is_none() {
            errs.push("model: required for gaussian fields (with ell)".into());
        }
        if let Some(m) = self.model {
            if m.regularity_violated() && !self.allow_irregular {
                errs.push(format!(
                    "model: {} paths are not C^{{1,1}}; set allow_irregular = true to run it as a control",
                    m.kind
                ));
            }
        }
        if !self.windows.is_empty() {
            if self.mode == BoundaryMode::Torus {
                errs.push("windows: only allowed in bounded mode".into());
            } else if self.eps > 0.0 {
                let ext = self.extent();
                for (i, w) in self.windows.iter().enumerate() {
                    let bb = w.bounding_box();
                    if bb.x0 < ext.x0 || bb.x1 > ext.x1 || bb.y0 < ext.y0 || bb.y1 > ext.y1 {
                        errs.push(format!(
                            "windows[{i}]: [{}, {}] x [{}, {}] is not inside the field extent [{}, {}] x [{}, {}]",
                            bb.x0, bb.x1, bb.y0, bb.y1, ext.x0, ext.x1, ext.y0, ext.y1
                        ));
                    }
                }
            }
        }
        for (i, &e) in self.sweep_eps.iter().enumerate() {
            match self.stride_for(e) {
                Some(k) if self.dims.0.is_multiple_of(k) && self.dims.1.is_multiple_of(k) => {}
                Some(k) => errs.push(format!(
                    "sweep_eps[{i}]: stride {k} does not divide {}x{}",
                    self.dims.0, self.dims.1
                )),
                None => errs.push(format!(
                    "sweep_eps[{i}]: {e} is not a positive integer multiple of eps = {}",
                    self.eps
                )),
            }
        }
        if self.threads == Some(0) {
            errs.push("threads: must be at least 1".into());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(ExperimentError::Config(errs))
        }
    }

    fn stride_for(&self, e: f64) -> Option<usize> {
        if !(e.is_finite() && e > 0.0 && self.eps > 0.0) {
            return None;
        }
        let k = (e / self.eps).round();
        if k >= 1.0 && (k * self.eps - e).abs() <= 1e-9 * e {
            Some(k as usize)
        } else {
            None
        }
    }

    /// Strides of the sweep in config order; the base grid when empty.
    pub fn sweep_strides(&self) -> Vec<usize> {
        if self.sweep_eps.is_empty() {
            return vec![1];
        }
        self.sweep_eps
            .iter()
            .filter_map(|&e| self.stride_for(e))
            .collect()
    }

    /// Spectral moment used for predictions.
    pub fn mu(&self) -> Result<f64, ExperimentError> {
        let m = self.model.ok_or_else(|| {
            ExperimentError::Config(vec!["model: required for closed-form predictions".into()])
        })?;
        if self.allow_irregular {
            Ok(m.spectral_moment_unchecked())
        } else {
            Ok(m.spectral_moment()?)
        }
    }
}

/// Worker count: the config hint, capped by `EXCTOP_THREADS` when set.
pub fn effective_threads(hint: Option<usize>) -> usize {
    let cap = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0);
    let base = hint.unwrap_or_else(rayon::current_num_threads);
    cap.map_or(base, |c| base.min(c)).max(1)
}

fn par_replicates<T, F>(config: &ExperimentConfig, f: F) -> Result<Vec<T>, ExperimentError>
where
    T: Send,
    F: Fn(u64) -> Result<T, ExperimentError> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(effective_threads(config.threads))
        .build()
        .map_err(|e| ExperimentError::ThreadPool(e.to_string()))?;
    pool.install(|| {
        (0..config.replicates as u64)
            .into_par_iter()
            .map(&f)
            .collect::<Result<Vec<T>, _>>()
    })
}

/// Builds replicate fields for a validated config.
struct FieldFactory {
    sampler: Option<FieldSampler>,
    source: FieldSource,
    base_seed: u64,
    dims: (usize, usize),
    eps: f64,
    mode: BoundaryMode,
    centre: (f64, f64),
}

impl FieldFactory {
    fn new(config: &ExperimentConfig) -> Result<Self, ExperimentError> {
        config.validate()?;
        let centre = (
            config.origin.0 + config.eps / 2.0,
            config.origin.1 + config.eps / 2.0,
        );
        let sampler = match config.source {
            FieldSource::Gaussian => Some(
                FieldSampler::new(
                    config.model.expect("validated"),
                    config.dims.0,
                    config.dims.1,
                    config.eps,
                    config.mode,
                )?
                .with_origin(centre),
            ),
            FieldSource::SineProduct => None,
        };
        Ok(Self {
            sampler,
            source: config.source,
            base_seed: config.seed,
            dims: config.dims,
            eps: config.eps,
            mode: config.mode,
            centre,
        })
    }

    fn field(&self, replicate: u64) -> FieldSample {
        match (&self.sampler, self.source) {
            (Some(s), _) => s.sample(replicate_seed(self.base_seed, replicate)),
            (None, _) => sine_product_field(self.dims, self.eps, self.centre, self.mode),
        }
    }
}

/// `sin(2 pi x) sin(2 pi y)` sampled on the lattice with point `(0, 0)` at
/// `centre`.
pub fn sine_product_field(
    dims: (usize, usize),
    eps: f64,
    centre: (f64, f64),
    mode: BoundaryMode,
) -> FieldSample {
    let tau = std::f64::consts::TAU;
    FieldSample::from_fn(dims.0, dims.1, eps, centre, mode, |x, y| {
        (tau * x).sin() * (tau * y).sin()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
struct RawMeasure {
    chi: i64,
    flips: i64,
    ones: i64,
}

fn raw_measure(img: &BinaryImage) -> RawMeasure {
    let (f1, f2) = topology::flip_counts(img);
    RawMeasure {
        chi: topology::chi_bicov(img),
        flips: (f1 + f2) as i64,
        ones: img.count_ones() as i64,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub lambda: f64,
    pub functional: String,
    pub mean: f64,
    pub sd: f64,
    pub se: f64,
    pub predicted: f64,
    pub z: f64,
}

/// Score of the same measurement against an alternative normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlternativeRow {
    pub lambda: f64,
    pub functional: String,
    pub convention: String,
    pub predicted: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub mode: BoundaryMode,
    pub replicates: usize,
    pub mu: f64,
    pub rows: Vec<SummaryRow>,
    pub alternatives: Vec<AlternativeRow>,
}

impl SummaryStats {
    pub fn row(&self, lambda: f64, functional: &str) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.lambda == lambda && r.functional == functional)
    }

    pub fn alternative(
        &self,
        lambda: f64,
        functional: &str,
        convention: &str,
    ) -> Option<&AlternativeRow> {
        self.alternatives.iter().find(|r| {
            r.lambda == lambda && r.functional == functional && r.convention == convention
        })
    }

    fn push(
        &mut self,
        lambda: f64,
        functional: &str,
        m: &IntMoments,
        scale: f64,
        predicted: f64,
    ) -> (f64, f64) {
        let s = m.summarize(scale);
        self.rows.push(SummaryRow {
            lambda,
            functional: functional.into(),
            mean: s.mean,
            sd: s.sd,
            se: s.se,
            predicted,
            z: z_score(s.mean, predicted, s.se),
        });
        (s.mean, s.se)
    }

    fn push_alt(
        &mut self,
        lambda: f64,
        functional: &str,
        convention: &str,
        (mean, se): (f64, f64),
        predicted: f64,
    ) {
        self.alternatives.push(AlternativeRow {
            lambda,
            functional: functional.into(),
            convention: convention.into(),
            predicted,
            z: z_score(mean, predicted, se),
        });
    }
}

fn accumulate(per_rep: &[Vec<RawMeasure>], idx: usize) -> [IntMoments; 3] {
    let mut acc = [IntMoments::default(); 3];
    for rep in per_rep {
        let m = rep[idx];
        acc[0].push(m.chi);
        acc[1].push(m.flips);
        acc[2].push(m.ones);
    }
    acc
}

/// Full-extent window of a bounded config without explicit windows.
fn default_window(config: &ExperimentConfig) -> Window {
    config
        .windows
        .first()
        .cloned()
        .unwrap_or_else(|| Window::rect(config.extent()).expect("validated extent"))
}

/// Replicated measurement of `chi`, `per_inf` and `vol` at every level.
pub fn run(config: &ExperimentConfig) -> Result<SummaryStats, ExperimentError> {
    if config.source != FieldSource::Gaussian {
        return Err(ExperimentError::Config(vec![
            "source: closed-form comparison needs a gaussian field".into(),
        ]));
    }
    let factory = FieldFactory::new(config)?;
    let mu = config.mu()?;
    let window = (config.mode == BoundaryMode::Bounded).then(|| default_window(config));
    let per_rep = par_replicates(config, |r| {
        let field = factory.field(r);
        config
            .lambdas
            .iter()
            .map(|&l| {
                let img = digitize(&field, l);
                let img = match &window {
                    Some(w) => img.clip_to_window(w)?,
                    None => img,
                };
                Ok(raw_measure(&img))
            })
            .collect()
    })?;

    let eps = config.eps;
    let mut out = SummaryStats {
        mode: config.mode,
        replicates: config.replicates,
        mu,
        rows: Vec::new(),
        alternatives: Vec::new(),
    };
    for (i, &l) in config.lambdas.iter().enumerate() {
        let [chi, flips, ones] = accumulate(&per_rep, i);
        match &window {
            None => {
                let area = config.dims.0 as f64 * config.dims.1 as f64 * eps * eps;
                let d = closed_form::GaussianDensities::new(mu, l).expect("mu checked");
                out.push(l, "chi", &chi, 1.0 / area, d.ec_density);
                let per = out.push(l, "per_inf", &flips, eps / area, d.per_inf_density);
                let vol = out.push(l, "vol", &ones, eps * eps / area, d.vol_density);
                out.push_alt(l, "per_inf", "one-sided", per, d.per_inf_density / 2.0);
                out.push_alt(l, "vol", "paper-phi", vol, paper_phi(l));
            }
            Some(w) => {
                let e = expected_functionals(w, mu, l, PhiConvention::Cdf).expect("mu checked");
                let p = expected_functionals(w, mu, l, PhiConvention::Centered).expect("mu checked");
                let d = closed_form::GaussianDensities::new(mu, l).expect("mu checked");
                let chi_m = out.push(l, "chi", &chi, 1.0, e.chi);
                let per_m = out.push(l, "per_inf", &flips, eps, e.per_inf);
                let vol_m = out.push(l, "vol", &ones, eps * eps, e.vol);
                out.push_alt(l, "chi", "paper-phi", chi_m, p.chi);
                out.push_alt(l, "per_inf", "paper-phi", per_m, p.per_inf);
                out.push_alt(l, "vol", "paper-phi", vol_m, p.vol);
                let one_sided_chi = e.chi - 0.125 * w.per_inf() * d.per_u_density;
                let one_sided_per = e.per_inf - 0.5 * w.vol() * d.per_inf_density;
                out.push_alt(l, "chi", "one-sided", chi_m, one_sided_chi);
                out.push_alt(l, "per_inf", "one-sided", per_m, one_sided_per);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub eps: f64,
    pub stride: usize,
    pub mean_chi: f64,
    pub se_chi: f64,
    /// `components_4 - holes_8` of the same images.
    pub mean_chi_oracle: f64,
    pub mean_checkerboard: f64,
    pub se_checkerboard: f64,
    pub checkerboard_per_pixel: f64,
    pub mean_components: f64,
}

/// Re-digitizes each replicate at every sweep stride (subsampling the same
/// realization) and tabulates `chi`, its union-find oracle, checkerboard
/// cells and 4-connected components.
pub fn convergence_sweep(config: &ExperimentConfig) -> Result<Vec<SweepRow>, ExperimentError> {
    let factory = FieldFactory::new(config)?;
    let strides = config.sweep_strides();
    let window = config.windows.first();
    // per replicate: [lambda][stride] -> (chi, oracle, checkerboard, components)
    let per_rep = par_replicates(config, |r| {
        let field = factory.field(r);
        let mut out = Vec::with_capacity(config.lambdas.len() * strides.len());
        for &l in &config.lambdas {
            for &k in &strides {
                let img = digitize(&field.subsample(k), l);
                let img = match window {
                    Some(w) => img.clip_to_window(w)?,
                    None => img,
                };
                let (anti, main) = topology::checkerboard_cells(&img);
                let comps = topology::components(&img, Adjacency::Four) as i64;
                out.push([
                    topology::chi_bicov(&img),
                    comps - topology::holes(&img) as i64,
                    (anti + main) as i64,
                    comps,
                ]);
            }
        }
        Ok(out)
    })?;
    let mut rows = Vec::new();
    for (li, &l) in config.lambdas.iter().enumerate() {
        for (si, &k) in strides.iter().enumerate() {
            let idx = li * strides.len() + si;
            let mut acc = [IntMoments::default(); 4];
            for rep in &per_rep {
                for (a, v) in acc.iter_mut().zip(rep[idx]) {
                    a.push(v);
                }
            }
            let chi = acc[0].summarize(1.0);
            let cb = acc[2].summarize(1.0);
            let pixels = (config.dims.0 / k * config.dims.1 / k) as f64;
            rows.push(SweepRow {
                lambda: l,
                eps: config.eps * k as f64,
                stride: k,
                mean_chi: chi.mean,
                se_chi: chi.se,
                mean_chi_oracle: acc[1].summarize(1.0).mean,
                mean_checkerboard: cb.mean,
                se_checkerboard: cb.se,
                checkerboard_per_pixel: cb.mean / pixels,
                mean_components: acc[3].summarize(1.0).mean,
            });
        }
    }
    Ok(rows)
}

/// Bounded-mode comparison of several windows on the same realizations:
/// per-window `chi`, `per_inf`, `vol` against the window decomposition,
/// and the `chi` difference of every window to the first one against the
/// predicted difference.
///
/// Functional labels: `chi@w1`, `per_inf@w1`, `vol@w1`, `chi@w1-w0`.
pub fn window_term_experiment(config: &ExperimentConfig) -> Result<SummaryStats, ExperimentError> {
    let mut errs = Vec::new();
    if config.mode != BoundaryMode::Bounded {
        errs.push("mode: window experiment needs bounded mode".to_string());
    }
    if config.windows.len() < 2 {
        errs.push(format!(
            "windows: need at least 2 windows, got {}",
            config.windows.len()
        ));
    }
    if config.source != FieldSource::Gaussian {
        errs.push("source: window experiment needs a gaussian field".into());
    }
    if let Some(m) = config.model {
        let margin = 3.0 * m.length_scale;
        let ext = config.extent();
        for (i, w) in config.windows.iter().enumerate() {
            let bb = w.bounding_box();
            let gaps = [
                bb.x0 - ext.x0,
                ext.x1 - bb.x1,
                bb.y0 - ext.y0,
                ext.y1 - bb.y1,
            ];
            if gaps.iter().any(|&g| g < margin - 1e-12) {
                errs.push(format!(
                    "windows[{i}]: needs a margin of at least 3 l = {margin} from the field edge"
                ));
            }
        }
    }
    if !errs.is_empty() {
        return Err(ExperimentError::Config(errs));
    }
    let factory = FieldFactory::new(config)?;
    let mu = config.mu()?;
    let windows = &config.windows;
    let per_rep = par_replicates(config, |r| {
        let field = factory.field(r);
        let mut out = Vec::with_capacity(config.lambdas.len() * windows.len());
        for &l in &config.lambdas {
            let img = digitize(&field, l);
            for w in windows {
                out.push(raw_measure(&img.clip_to_window(w)?));
            }
        }
        Ok(out)
    })?;
    let eps = config.eps;
    let nw = windows.len();
    let mut out = SummaryStats {
        mode: config.mode,
        replicates: config.replicates,
        mu,
        rows: Vec::new(),
        alternatives: Vec::new(),
    };
    for (li, &l) in config.lambdas.iter().enumerate() {
        let expected: Vec<_> = windows
            .iter()
            .map(|w| expected_functionals(w, mu, l, PhiConvention::Cdf).expect("mu checked"))
            .collect();
        for (wi, e) in expected.iter().enumerate() {
            let [chi, flips, ones] = accumulate(&per_rep, li * nw + wi);
            out.push(l, &format!("chi@w{wi}"), &chi, 1.0, e.chi);
            out.push(l, &format!("per_inf@w{wi}"), &flips, eps, e.per_inf);
            out.push(l, &format!("vol@w{wi}"), &ones, eps * eps, e.vol);
        }
        for wi in 1..nw {
            let diff: IntMoments = per_rep
                .iter()
                .map(|rep| rep[li * nw + wi].chi - rep[li * nw].chi)
                .collect();
            out.push(
                l,
                &format!("chi@w{wi}-w0"),
                &diff,
                1.0,
                expected[wi].chi - expected[0].chi,
            );
        }
    }
    Ok(out)
}
