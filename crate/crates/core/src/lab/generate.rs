use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::rng::{standard_normal, streams, RngSeed};
use crate::error::{Error, Result};
use crate::gaussian::GaussianMeasure;
use crate::operator::TraceClassBlock;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SpectrumKind {
    /// `λ_k = k^{-s}`, `s > 1`.
    PowerLaw {
        s: f64,
    },
    /// `λ_k = exp(−rate·(k − 1))`.
    Exponential {
        rate: f64,
    },
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumFamily {
    pub kind: SpectrumKind,
    pub dim: usize,
}

impl SpectrumFamily {
    pub fn power_law(s: f64, dim: usize) -> Self {
        Self {
            kind: SpectrumKind::PowerLaw { s },
            dim,
        }
    }

    pub fn exponential(rate: f64, dim: usize) -> Self {
        Self {
            kind: SpectrumKind::Exponential { rate },
            dim,
        }
    }

    pub fn explicit(values: Vec<f64>) -> Self {
        let dim = values.len();
        Self {
            kind: SpectrumKind::Explicit(values),
            dim,
        }
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        if self.dim == 0 {
            return Err(Error::InvalidParameter("dim must be positive".into()));
        }
        let values: Vec<f64> = match &self.kind {
            SpectrumKind::PowerLaw { s } => {
                if !(s.is_finite() && *s > 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "power-law exponent must exceed 1, got {s}"
                    )));
                }
                (1..=self.dim).map(|k| (k as f64).powf(-s)).collect()
            }
            SpectrumKind::Exponential { rate } => {
                if !(rate.is_finite() && *rate > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "decay rate must be positive, got {rate}"
                    )));
                }
                (0..self.dim).map(|k| (-rate * k as f64).exp()).collect()
            }
            SpectrumKind::Explicit(v) => {
                if v.len() != self.dim {
                    return Err(Error::DimMismatch {
                        expected: self.dim,
                        found: v.len(),
                    });
                }
                v.clone()
            }
        };
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "eigenvalues must be positive, got {bad}"
            )));
        }
        Ok(values)
    }
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// signs of `diag(R)` folded into `Q`.
pub fn random_orthogonal(dim: usize, seed: RngSeed) -> DMatrix<f64> {
    let mut rng = seed.stream(streams::ROTATION);
    let g = DMatrix::from_fn(dim, dim, |_, _| standard_normal(&mut rng));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// `N(m, V diag(λ) Vᵀ)` with `V` random orthogonal and `m` i.i.d. normal
/// scaled by `mean_scale`.
pub fn gen_measure(
    family: &SpectrumFamily,
    seed: RngSeed,
    mean_scale: f64,
) -> Result<GaussianMeasure> {
    if !(mean_scale.is_finite() && mean_scale >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "mean_scale must be >= 0, got {mean_scale}"
        )));
    }
    let eig = family.eigenvalues()?;
    let dim = family.dim;
    let v = random_orthogonal(dim, seed);
    let cov = &v * DMatrix::from_diagonal(&DVector::from_vec(eig)) * v.transpose();
    let mut rng = seed.stream(streams::MEAN);
    let mean = DVector::from_fn(dim, |_, _| mean_scale * standard_normal(&mut rng));
    GaussianMeasure::new(mean, TraceClassBlock::from_computed(cov)?)
}
