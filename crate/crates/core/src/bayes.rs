//! Linear-Gaussian Bayesian inverse problem `y = Au + η`, `η ~ N(0, Γ)`,
//! with prior `u ~ N(m₀, C₀)`.
//!
//! All solves happen in observation space against `Γ + A C₀ Aᵀ`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::GaussianMeasure;
use crate::operator::{check_dims, sym_eigen, TraceClassBlock};
use crate::tolerance::ToleranceConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelWire", into = "ModelWire")]
pub struct LinearGaussianModel {
    forward: DMatrix<f64>,
    noise_cov: TraceClassBlock,
    prior: GaussianMeasure,
    observation: DVector<f64>,
}

impl LinearGaussianModel {
    pub fn new(
        forward: DMatrix<f64>,
        noise_cov: TraceClassBlock,
        prior: GaussianMeasure,
        observation: DVector<f64>,
    ) -> Result<Self> {
        let tol = ToleranceConfig::DEFAULT;
        let obs = forward.nrows();
        check_dims(prior.dim(), forward.ncols())?;
        check_dims(obs, noise_cov.dim())?;
        check_dims(obs, observation.len())?;
        if forward
            .iter()
            .chain(observation.iter())
            .any(|v| !v.is_finite())
        {
            return Err(Error::NonFinite("model"));
        }
        let noise = sym_eigen(&noise_cov)?;
        if obs > 0 && noise.min() <= tol.psd_clip {
            return Err(Error::Degenerate {
                what: "noise covariance",
                eigenvalue: noise.min(),
            });
        }
        let c0 = sym_eigen(prior.cov())?;
        if prior.dim() > 0 && c0.min() <= tol.psd_clip {
            return Err(Error::Degenerate {
                what: "prior covariance",
                eigenvalue: c0.min(),
            });
        }
        Ok(Self {
            forward,
            noise_cov,
            prior,
            observation,
        })
    }

    pub fn forward(&self) -> &DMatrix<f64> {
        &self.forward
    }

    pub fn noise_cov(&self) -> &TraceClassBlock {
        &self.noise_cov
    }

    pub fn prior(&self) -> &GaussianMeasure {
        &self.prior
    }

    pub fn observation(&self) -> &DVector<f64> {
        &self.observation
    }

    pub fn obs_dim(&self) -> usize {
        self.forward.nrows()
    }

    pub fn dim(&self) -> usize {
        self.forward.ncols()
    }

    /// Adds one observation row with its own independent noise variance.
    pub fn with_extra_observation(&self, row: &[f64], noise_var: f64, y: f64) -> Result<Self> {
        check_dims(self.dim(), row.len())?;
        let n = self.obs_dim();
        let forward = DMatrix::from_fn(n + 1, self.dim(), |i, j| {
            if i < n {
                self.forward[(i, j)]
            } else {
                row[j]
            }
        });
        let noise = DMatrix::from_fn(n + 1, n + 1, |i, j| match (i < n, j < n) {
            (true, true) => self.noise_cov.matrix()[(i, j)],
            (false, false) => noise_var,
            _ => 0.0,
        });
        let mut obs: Vec<f64> = self.observation.iter().copied().collect();
        obs.push(y);
        Self::new(
            forward,
            TraceClassBlock::new(noise)?,
            self.prior.clone(),
            DVector::from_vec(obs),
        )
    }
}

#[derive(Serialize, Deserialize)]
struct ModelWire {
    forward: Vec<Vec<f64>>,
    noise_cov: Vec<Vec<f64>>,
    prior: GaussianMeasure,
    observation: Vec<f64>,
}

impl TryFrom<ModelWire> for LinearGaussianModel {
    type Error = Error;

    fn try_from(w: ModelWire) -> Result<Self> {
        let rows = w.forward.len();
        let cols = w.prior.dim();
        if let Some(bad) = w.forward.iter().find(|r| r.len() != cols) {
            return Err(Error::DimMismatch {
                expected: cols,
                found: bad.len(),
            });
        }
        let forward = DMatrix::from_fn(rows, cols, |i, j| w.forward[i][j]);
        LinearGaussianModel::new(
            forward,
            TraceClassBlock::from_rows(&w.noise_cov)?,
            w.prior,
            DVector::from_vec(w.observation),
        )
    }
}

impl From<LinearGaussianModel> for ModelWire {
    fn from(m: LinearGaussianModel) -> Self {
        ModelWire {
            forward: m
                .forward
                .row_iter()
                .map(|r| r.iter().copied().collect())
                .collect(),
            noise_cov: m.noise_cov.rows(),
            prior: m.prior,
            observation: m.observation.iter().copied().collect(),
        }
    }
}

fn cholesky(m: DMatrix<f64>, what: &'static str) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(m).ok_or(Error::NotPositive {
        what,
        value: f64::NAN,
    })
}

fn chol_logdet(c: &Cholesky<f64, Dyn>) -> f64 {
    2.0 * c.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>()
}

/// `Γ + A C₀ Aᵀ`, factored.
fn innovation(model: &LinearGaussianModel) -> Result<Cholesky<f64, Dyn>> {
    let a = &model.forward;
    let g = model.noise_cov.matrix() + a * model.prior.cov().matrix() * a.transpose();
    cholesky((&g + g.transpose()) * 0.5, "Γ + A C₀ Aᵀ")
}

pub fn posterior(model: &LinearGaussianModel) -> Result<GaussianMeasure> {
    let chol = innovation(model)?;
    let a = &model.forward;
    let c0 = model.prior.cov().matrix();
    let m0 = model.prior.mean();
    let ac0 = a * c0;
    let innov = &model.observation - a * m0;
    let mean = m0 + ac0.transpose() * chol.solve(&innov);
    let cov = c0 - ac0.transpose() * chol.solve(&ac0);
    GaussianMeasure::new(mean, TraceClassBlock::from_computed(cov)?)
}

/// `½[log det(Γ + AC₀Aᵀ) − log det Γ − tr(ACAᵀΓ⁻¹) − ⟨m − m₀, AᵀΓ⁻¹(Am − y)⟩]`.
pub fn kl_posterior_prior(model: &LinearGaussianModel) -> Result<f64> {
    let post = posterior(model)?;
    let innov = innovation(model)?;
    let noise = cholesky(model.noise_cov.matrix().clone(), "Γ")?;
    let a = &model.forward;
    let acat = a * post.cov().matrix() * a.transpose();
    let trace_term = noise.solve(&acat).trace();
    let dm = post.mean() - model.prior.mean();
    let resid = a * post.mean() - &model.observation;
    let mean_term = dm.dot(&(a.transpose() * noise.solve(&resid)));
    Ok(0.5 * (chol_logdet(&innov) - chol_logdet(&noise) - trace_term - mean_term))
}

/// The `Γ = I` specialization
/// `½[log det(I + AC₀Aᵀ) − tr(ACAᵀ) − ⟨m − m₀, Aᵀ(Am − y)⟩]`.
pub fn kl_posterior_prior_unit_noise(model: &LinearGaussianModel) -> Result<f64> {
    let n = model.obs_dim();
    if model.noise_cov.matrix() != &DMatrix::identity(n, n) {
        return Err(Error::InvalidParameter(
            "noise covariance is not the identity".into(),
        ));
    }
    let post = posterior(model)?;
    let innov = innovation(model)?;
    let a = &model.forward;
    let trace_term = (a * post.cov().matrix() * a.transpose()).trace();
    let dm = post.mean() - model.prior.mean();
    let resid = a * post.mean() - &model.observation;
    let mean_term = dm.dot(&(a.transpose() * resid));
    Ok(0.5 * (chol_logdet(&innov) - trace_term - mean_term))
}
