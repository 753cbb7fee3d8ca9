//! Alpha log-determinant divergences between positive definite trace-class
//! operators, and the regularized and exact Kullback-Leibler, Rényi,
//! Bhattacharyya and Hellinger divergences between Gaussian measures on a
//! Hilbert space.
//!
//! Operators are represented as a finite symmetric block plus a scalar shift
//! (`T + cI`), which makes extended traces and Fredholm determinants exact
//! for finite-rank perturbations. See [`operator`].
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`operator`] | shifted operators, `tr_X`, `log det_X`, `log det₂`, square roots |
//! | [`logdet`] | `d^α_logdet` for `α ∈ [−1, 1]` |
//! | [`gaussian`] | regularized and exact divergences, Radon-Nikodym log-density |
//! | [`bayes`] | linear-Gaussian posterior and its KL to the prior |
//! | [`lab`] | measure generation, sampling, Monte-Carlo oracles, sweeps |
//!
//! ```
//! use gaussdiv::{exact_kl, regularized_kl, GaussianMeasure, ToleranceConfig};
//!
//! let tol = ToleranceConfig::default();
//! let nu = GaussianMeasure::scalar(0.0, 0.5).unwrap();
//! let mu = GaussianMeasure::scalar(0.0, 1.0).unwrap();
//! let exact = exact_kl(&nu, &mu, &tol).unwrap().value();
//! let approx = regularized_kl(&nu, &mu, 1e-8, &tol).unwrap();
//! assert!((exact - approx).abs() < 1e-6);
//! ```

pub mod bayes;
pub mod error;
pub mod gaussian;
pub mod lab;
pub mod logdet;
pub mod operator;
pub mod tolerance;

pub use bayes::{
    kl_posterior_prior, kl_posterior_prior_unit_noise, posterior, LinearGaussianModel,
};
pub use error::{Error, Result};
pub use gaussian::{
    equivalence_data, exact_bhattacharyya, exact_hellinger, exact_kl, exact_renyi,
    hellinger_from_bhattacharyya, log_radon_nikodym, regularized_bhattacharyya,
    regularized_hellinger, regularized_kl, regularized_renyi, Divergence, EquivalenceData,
    GaussianMeasure, RadonNikodym, RenyiOrder,
};
pub use logdet::{alpha_logdet, alpha_logdet_dual_check, AlphaOrder, LogDetPath, LogDetResult};
pub use operator::{
    carleman_logdet2, ext_fredholm_logdet, ext_trace, psd_inv_sqrt, psd_sqrt, shifted_combine,
    shifted_inv, shifted_mul, sym_eigen, ShiftedOperator, Spectrum, TraceClassBlock,
};
pub use tolerance::ToleranceConfig;

pub use nalgebra::{DMatrix, DVector};
