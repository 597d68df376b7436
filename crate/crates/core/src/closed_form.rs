//! Mean functionals of excursion sets `{f <= lambda}` of stationary
//! isotropic centred unit-variance Gaussian fields.
//!
//! Densities per unit area, with `mu` the second spectral moment:
//!
//! ```text
//! chi:      -mu * lambda * exp(-lambda^2 / 2) / (2 pi)^{3/2}
//! per_u:    sqrt(mu) / pi * exp(-lambda^2 / 2)        (each axis direction)
//! per_inf:  2 sqrt(mu) / pi * exp(-lambda^2 / 2)
//! vol:      P(f(0) <= lambda)
//! ```
//!
//! Window totals follow the stationary decomposition
//! `E chi(F n W) = Vol(W) chi_bar + (Per_u2(W) per_u1_bar + Per_u1(W) per_u2_bar) / 4 + chi(W) vol_bar`.

use core::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::window::Window;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("spectral moment must be positive and finite, got {mu}")]
pub struct DomainError {
    pub mu: f64,
}

/// Which normalization of the Gaussian distribution function enters the
/// volume terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum PhiConvention {
    /// `P(f(0) <= lambda)`, the standard normal distribution function.
    #[default]
    Cdf,
    /// `(2 pi)^{-1/2} int_0^lambda exp(-t^2/2) dt` for the volume and
    /// perimeter window terms, and `(2 pi)^{-1/2}` times that for the
    /// Euler characteristic window term.
    #[cfg_attr(feature = "serde", serde(rename = "paper-phi"))]
    Centered,
}

fn check_mu(mu: f64) -> Result<(), DomainError> {
    if mu.is_finite() && mu > 0.0 {
        Ok(())
    } else {
        Err(DomainError { mu })
    }
}

pub fn ec_density(mu: f64, lambda: f64) -> f64 {
    // subtracting from 0.0 avoids a negative zero at lambda = 0
    0.0 - mu * lambda * libm::exp(-lambda * lambda / 2.0) / libm::pow(2.0 * PI, 1.5)
}

/// `(per_u_density, per_inf_density)`.
pub fn per_densities(mu: f64, lambda: f64) -> Result<(f64, f64), DomainError> {
    check_mu(mu)?;
    let per_u = libm::sqrt(mu) / PI * libm::exp(-lambda * lambda / 2.0);
    Ok((per_u, 2.0 * per_u))
}

/// Standard normal distribution function.
pub fn vol_density(lambda: f64) -> f64 {
    0.5 * libm::erfc(-lambda * FRAC_1_SQRT_2)
}

/// `(2 pi)^{-1/2} int_0^lambda exp(-t^2/2) dt = vol_density(lambda) - 1/2`.
pub fn paper_phi(lambda: f64) -> f64 {
    0.5 * libm::erf(lambda * FRAC_1_SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GaussianDensities {
    pub lambda: f64,
    pub mu: f64,
    pub ec_density: f64,
    pub per_u_density: f64,
    pub per_inf_density: f64,
    pub vol_density: f64,
}

impl GaussianDensities {
    pub fn new(mu: f64, lambda: f64) -> Result<Self, DomainError> {
        let (per_u_density, per_inf_density) = per_densities(mu, lambda)?;
        Ok(Self {
            lambda,
            mu,
            ec_density: ec_density(mu, lambda),
            per_u_density,
            per_inf_density,
            vol_density: vol_density(lambda),
        })
    }
}

/// Expected volume, `L^inf` perimeter and Euler characteristic of `F n W`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExpectedFunctionals {
    pub vol: f64,
    pub per_inf: f64,
    pub chi: f64,
}

pub fn expected_functionals(
    w: &Window,
    mu: f64,
    lambda: f64,
    convention: PhiConvention,
) -> Result<ExpectedFunctionals, DomainError> {
    let d = GaussianDensities::new(mu, lambda)?;
    let (vol_w, per1_w, per2_w) = (w.vol(), w.per_u(1), w.per_u(2));
    let chi_w = w.euler() as f64;
    let (vol_term, chi_vol_term) = match convention {
        PhiConvention::Cdf => (d.vol_density, d.vol_density),
        PhiConvention::Centered => {
            let phi = paper_phi(lambda);
            (phi, phi / libm::sqrt(2.0 * PI))
        }
    };
    Ok(ExpectedFunctionals {
        vol: vol_w * vol_term,
        per_inf: vol_w * d.per_inf_density + (per1_w + per2_w) * vol_term,
        chi: vol_w * d.ec_density
            + 0.25 * (per2_w * d.per_u_density + per1_w * d.per_u_density)
            + chi_w * chi_vol_term,
    })
}
