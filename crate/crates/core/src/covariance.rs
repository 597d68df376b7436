//! Stationary isotropic unit-variance covariance families.

use core::fmt;
use core::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum CovarianceKind {
    /// `exp(-r^2 / (2 l^2))`
    SquaredExponential,
    /// `(1 + s + s^2/3) exp(-s)` with `s = sqrt(5) r / l`
    Matern52,
    /// `(1 + s) exp(-s)` with `s = sqrt(3) r / l`. Paths are `C^1` but not
    /// `C^{1,1}`; shipped as a negative control.
    Matern32,
}

impl CovarianceKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::SquaredExponential => "squared-exponential",
            Self::Matern52 => "matern-5/2",
            Self::Matern32 => "matern-3/2",
        }
    }
}

impl fmt::Display for CovarianceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown covariance model '{0}' (expected squared-exponential, matern-5/2 or matern-3/2)")]
pub struct UnknownKind(pub alloc::string::String);

impl FromStr for CovarianceKind {
    type Err = UnknownKind;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "squared-exponential" | "se" | "gaussian" => Ok(Self::SquaredExponential),
            "matern-5/2" | "matern52" => Ok(Self::Matern52),
            "matern-3/2" | "matern32" => Ok(Self::Matern32),
            other => Err(UnknownKind(other.into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("{kind} covariance does not give C^{{1,1}} paths; pass an explicit override to use its spectral moment")]
pub struct RegularityError {
    pub kind: CovarianceKind,
}

/// Covariance family plus length scale (world units, `> 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CovarianceModel {
    pub kind: CovarianceKind,
    pub length_scale: f64,
}

impl CovarianceModel {
    pub fn new(kind: CovarianceKind, length_scale: f64) -> Self {
        assert!(
            length_scale.is_finite() && length_scale > 0.0,
            "length scale must be positive and finite, got {length_scale}"
        );
        Self { kind, length_scale }
    }

    pub fn squared_exponential(length_scale: f64) -> Self {
        Self::new(CovarianceKind::SquaredExponential, length_scale)
    }

    pub fn matern52(length_scale: f64) -> Self {
        Self::new(CovarianceKind::Matern52, length_scale)
    }

    pub fn matern32(length_scale: f64) -> Self {
        Self::new(CovarianceKind::Matern32, length_scale)
    }

    pub fn regularity_violated(&self) -> bool {
        self.kind == CovarianceKind::Matern32
    }

    /// Reduced covariance `sigma(r) = E f(0) f(r u)`; `sigma(0) = 1`.
    pub fn reduced_cov(&self, r: f64) -> f64 {
        let r = libm::fabs(r);
        let l = self.length_scale;
        match self.kind {
            CovarianceKind::SquaredExponential => libm::exp(-r * r / (2.0 * l * l)),
            CovarianceKind::Matern52 => {
                let s = libm::sqrt(5.0) * r / l;
                (1.0 + s + s * s / 3.0) * libm::exp(-s)
            }
            CovarianceKind::Matern32 => {
                let s = libm::sqrt(3.0) * r / l;
                (1.0 + s) * libm::exp(-s)
            }
        }
    }

    /// Second spectral moment `mu = E (d1 f(0))^2 = -sigma''(0)`.
    pub fn spectral_moment(&self) -> Result<f64, RegularityError> {
        if self.regularity_violated() {
            return Err(RegularityError { kind: self.kind });
        }
        Ok(self.spectral_moment_unchecked())
    }

    /// Same as [`spectral_moment`](Self::spectral_moment) without the
    /// regularity guard. For Matérn-3/2 the value `3 / l^2` is finite but
    /// the field's gradient is not Lipschitz.
    pub fn spectral_moment_unchecked(&self) -> f64 {
        let l2 = self.length_scale * self.length_scale;
        match self.kind {
            CovarianceKind::SquaredExponential => 1.0 / l2,
            CovarianceKind::Matern52 => 5.0 / (3.0 * l2),
            CovarianceKind::Matern32 => 3.0 / l2,
        }
    }
}
