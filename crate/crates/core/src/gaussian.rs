//! Regularized and exact divergences between Gaussian measures.
//!
//! Argument order is always `(ν, μ)`, i.e. the divergence `D(ν ‖ μ)`. For the
//! exact divergences `μ = N(m₀, C₀)` is the reference measure and
//! `ν = N(m, C)` is written as `C = C₀^{1/2}(I − S)C₀^{1/2}`; everything is
//! evaluated from the spectrum `{α_k}` of `S` and the whitened mean
//! difference `δ = C₀^{-1/2}(m − m₀)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logdet::{alpha_logdet, AlphaOrder};
use crate::operator::{
    check_dims, check_psd, shifted_combine, sym_eigen, ShiftedOperator, Spectrum, TraceClassBlock,
};
use crate::tolerance::ToleranceConfig;

/// `κ(C₀)` above which equivalence data carries a conditioning warning.
pub const CONDITION_WARNING: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureWire", into = "MeasureWire")]
pub struct GaussianMeasure {
    mean: DVector<f64>,
    cov: TraceClassBlock,
}

impl GaussianMeasure {
    pub fn new(mean: DVector<f64>, cov: TraceClassBlock) -> Result<Self> {
        Self::with_tolerance(mean, cov, &ToleranceConfig::DEFAULT)
    }

    pub fn with_tolerance(
        mean: DVector<f64>,
        cov: TraceClassBlock,
        tol: &ToleranceConfig,
    ) -> Result<Self> {
        check_dims(cov.dim(), mean.len())?;
        if mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("mean"));
        }
        check_psd(&cov, "covariance", tol)?;
        Ok(Self { mean, cov })
    }

    pub fn centered(cov: TraceClassBlock) -> Result<Self> {
        let dim = cov.dim();
        Self::new(DVector::zeros(dim), cov)
    }

    /// 1-D convenience constructor.
    pub fn scalar(mean: f64, var: f64) -> Result<Self> {
        Self::new(
            DVector::from_element(1, mean),
            TraceClassBlock::from_diagonal(&[var])?,
        )
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &TraceClassBlock {
        &self.cov
    }

    /// `C + γI` as a shifted operator.
    pub fn regularized_cov(&self, gamma: f64) -> Result<ShiftedOperator> {
        ShiftedOperator::new(self.cov.clone(), gamma)
    }
}

#[derive(Serialize, Deserialize)]
struct MeasureWire {
    dim: usize,
    mean: Vec<f64>,
    cov: Vec<Vec<f64>>,
}

impl TryFrom<MeasureWire> for GaussianMeasure {
    type Error = Error;

    fn try_from(w: MeasureWire) -> Result<Self> {
        check_dims(w.dim, w.mean.len())?;
        check_dims(w.dim, w.cov.len())?;
        GaussianMeasure::new(
            DVector::from_vec(w.mean),
            TraceClassBlock::from_rows(&w.cov)?,
        )
    }
}

impl From<GaussianMeasure> for MeasureWire {
    fn from(m: GaussianMeasure) -> Self {
        MeasureWire {
            dim: m.dim(),
            mean: m.mean.iter().copied().collect(),
            cov: m.cov.rows(),
        }
    }
}

/// Order `r` of a Rényi divergence, strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct RenyiOrder(f64);

impl RenyiOrder {
    pub fn new(r: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0 && r < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "Renyi order must lie in (0, 1), got {r}"
            )));
        }
        Ok(Self(r))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Value of an exact divergence. Mutually singular measures are a modelled
/// outcome, not an error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Divergence {
    Finite(f64),
    Infinite { max_alpha: f64 },
}

impl Divergence {
    /// The value as a float, `+∞` for singular pairs.
    pub fn value(&self) -> f64 {
        match self {
            Divergence::Finite(v) => *v,
            Divergence::Infinite { .. } => f64::INFINITY,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Divergence::Infinite { .. })
    }

    pub fn finite(self) -> Result<f64> {
        match self {
            Divergence::Finite(v) => Ok(v),
            Divergence::Infinite { max_alpha } => Err(Error::SingularPair { max_alpha }),
        }
    }
}

/// Feldman-Hajek data of the pair `(ν, μ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceData {
    /// `S = I − C₀^{-1/2} C C₀^{-1/2}`.
    pub s_block: TraceClassBlock,
    pub s_spectrum: Spectrum,
    /// `δ = C₀^{-1/2}(m − m₀)`.
    pub delta: DVector<f64>,
    pub singular: bool,
    /// `C₀^{-1/2}`, kept for Radon-Nikodym evaluation.
    pub whitener: TraceClassBlock,
    pub condition_number: f64,
    pub ill_conditioned: bool,
    singular_margin: f64,
}

pub fn equivalence_data(
    nu: &GaussianMeasure,
    mu: &GaussianMeasure,
    tol: &ToleranceConfig,
) -> Result<EquivalenceData> {
    check_dims(mu.dim(), nu.dim())?;
    let c0 = sym_eigen(mu.cov())?;
    let dim = mu.dim();
    let (lo, hi) = (c0.min(), c0.max());
    if dim > 0 && lo <= tol.psd_clip {
        return Err(Error::Degenerate {
            what: "reference covariance",
            eigenvalue: lo,
        });
    }
    let whitener = TraceClassBlock::from_computed(c0.map(|l| 1.0 / l.sqrt()))?;
    let whitened = nu.cov().congruence(&whitener)?;
    let s_block = TraceClassBlock::from_computed(DMatrix::identity(dim, dim) - whitened.matrix())?;
    let s_spectrum = sym_eigen(&s_block)?;
    let delta = whitener.apply(&(nu.mean() - mu.mean()))?;
    let singular = dim > 0 && s_spectrum.max() >= 1.0 - tol.singular_margin;
    let condition_number = if dim > 0 { hi / lo } else { 1.0 };
    let ill_conditioned = condition_number > CONDITION_WARNING;
    if ill_conditioned {
        log::warn!("reference covariance is ill-conditioned (kappa = {condition_number:e})");
    }
    Ok(EquivalenceData {
        s_block,
        s_spectrum,
        delta,
        singular,
        whitener,
        condition_number,
        ill_conditioned,
        singular_margin: tol.singular_margin,
    })
}

impl EquivalenceData {
    pub fn max_alpha(&self) -> f64 {
        self.s_spectrum.max()
    }

    fn alphas(&self) -> impl Iterator<Item = f64> + '_ {
        self.s_spectrum.eigenvalues.iter().copied()
    }

    /// Coordinates of `δ` in the eigenbasis of `S`.
    fn delta_coords(&self) -> DVector<f64> {
        self.s_spectrum.eigenvectors.transpose() * &self.delta
    }

    fn infinite(&self) -> Divergence {
        Divergence::Infinite {
            max_alpha: self.max_alpha(),
        }
    }

    /// `½‖δ‖² − ½ log det₂(I − S)`.
    pub fn kl(&self) -> Divergence {
        if self.singular {
            return self.infinite();
        }
        let logdet2: f64 = self.alphas().map(|a| (-a).ln_1p() + a).sum();
        Divergence::Finite(0.5 * self.delta.norm_squared() - 0.5 * logdet2)
    }

    pub fn renyi(&self, r: RenyiOrder) -> Result<Divergence> {
        if self.singular {
            return Ok(self.infinite());
        }
        let r = r.value();
        let q = 1.0 - r;
        let coords = self.delta_coords();
        let mut quad = 0.0;
        let mut logdet = 0.0;
        for (a, z) in self.alphas().zip(coords.iter()) {
            let pivot = 1.0 - q * a;
            if pivot <= self.singular_margin {
                return Err(Error::NotPositive {
                    what: "I − (1−r)S",
                    value: pivot,
                });
            }
            quad += z * z / pivot;
            // (r−1) log(1−α) + log(1−(1−r)α), arranged to avoid cancellation
            // at whichever endpoint r is close to.
            logdet += if r < 0.5 {
                r * (-a).ln_1p() + (r * a / (1.0 - a)).ln_1p()
            } else {
                (-q * a).ln_1p() - q * (-a).ln_1p()
            };
        }
        Ok(Divergence::Finite(0.5 * quad + logdet / (2.0 * r * q)))
    }

    /// `⅛‖(I − S/2)^{-1/2}δ‖² + ½ Σ log[(1 − α_k)^{-1/2}(1 − α_k/2)]`.
    pub fn bhattacharyya(&self) -> Divergence {
        if self.singular {
            return self.infinite();
        }
        let coords = self.delta_coords();
        let mut quad = 0.0;
        let mut logdet = 0.0;
        for (a, z) in self.alphas().zip(coords.iter()) {
            quad += z * z / (1.0 - 0.5 * a);
            logdet += (-0.5 * a).ln_1p() - 0.5 * (-a).ln_1p();
        }
        Divergence::Finite(0.125 * quad + 0.5 * logdet)
    }

    pub fn hellinger(&self) -> Divergence {
        match self.bhattacharyya() {
            Divergence::Finite(b) => Divergence::Finite(hellinger_from_bhattacharyya(b)),
            inf => inf,
        }
    }
}

/// `√(2(1 − e^{−D_B}))`.
pub fn hellinger_from_bhattacharyya(db: f64) -> f64 {
    (2.0 * -(-db).exp_m1()).max(0.0).sqrt()
}

pub fn exact_kl(
    nu: &GaussianMeasure,
    mu: &GaussianMeasure,
    tol: &ToleranceConfig,
) -> Result<Divergence> {
    Ok(equivalence_data(nu, mu, tol)?.kl())
}

pub fn exact_renyi(
    nu: &GaussianMeasure,
    mu: &GaussianMeasure,
    r: RenyiOrder,
    tol: &ToleranceConfig,
) -> Result<Divergence> {
    equivalence_data(nu, mu, tol)?.renyi(r)
}

pub fn exact_bhattacharyya(
    nu: &GaussianMeasure,
    mu: &GaussianMeasure,
    tol: &ToleranceConfig,
) -> Result<Divergence> {
    Ok(equivalence_data(nu, mu, tol)?.bhattacharyya())
}

pub fn exact_hellinger(
    nu: &GaussianMeasure,
    mu: &GaussianMeasure,
    tol: &ToleranceConfig,
) -> Result<Divergence> {
    Ok(equivalence_data(nu, mu, tol)?.hellinger())
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::NotPositive {
            what: "regularization gamma",
            value: gamma,
        });
    }
    Ok(())
}

/// `½⟨Δm, (C₂+γI)^{-1}Δm⟩ + ½ d¹[(C₁+γI), (C₂+γI)]` with `ν = N(m₁, C₁)`
/// first.
pub fn regularized_kl(
    nu: &GaussianMeasure,
    mu: &GaussianMeasure,
    gamma: f64,
    tol: &ToleranceConfig,
) -> Result<f64> {
    check_gamma(gamma)?;
    check_dims(nu.dim(), mu.dim())?;
    let x = nu.regularized_cov(gamma)?;
    let y = mu.regularized_cov(gamma)?;
    let dm = nu.mean() - mu.mean();
    let quad = y.inv_quadratic(&dm, tol)?;
    let d1 = alpha_logdet(AlphaOrder::new(1.0)?, &x, &y, tol)?.value;
    Ok(0.5 * quad + 0.5 * d1)
}

/// Regularized Rényi divergence of order `r`. The endpoints are accepted and
/// redirected: `r = 1` gives `D^γ_KL(ν‖μ)`, `r = 0` gives `D^γ_KL(μ‖ν)`.
pub fn regularized_renyi(
    nu: &GaussianMeasure,
    mu: &GaussianMeasure,
    r: f64,
    gamma: f64,
    tol: &ToleranceConfig,
) -> Result<f64> {
    if r == 1.0 {
        return regularized_kl(nu, mu, gamma, tol);
    }
    if r == 0.0 {
        return regularized_kl(mu, nu, gamma, tol);
    }
    let r = RenyiOrder::new(r)?.value();
    check_gamma(gamma)?;
    check_dims(nu.dim(), mu.dim())?;
    let x = nu.regularized_cov(gamma)?;
    let y = mu.regularized_cov(gamma)?;
    let combo = shifted_combine(&[(1.0 - r, &x), (r, &y)])?;
    let dm = nu.mean() - mu.mean();
    let quad = combo.inv_quadratic(&dm, tol)?;
    let d = alpha_logdet(AlphaOrder::new(2.0 * r - 1.0)?, &x, &y, tol)?.value;
    Ok(0.5 * quad + 0.5 * d)
}

/// `¼ D^γ_{R,1/2}`.
pub fn regularized_bhattacharyya(
    nu: &GaussianMeasure,
    mu: &GaussianMeasure,
    gamma: f64,
    tol: &ToleranceConfig,
) -> Result<f64> {
    Ok(0.25 * regularized_renyi(nu, mu, 0.5, gamma, tol)?)
}

pub fn regularized_hellinger(
    nu: &GaussianMeasure,
    mu: &GaussianMeasure,
    gamma: f64,
    tol: &ToleranceConfig,
) -> Result<f64> {
    Ok(hellinger_from_bhattacharyya(regularized_bhattacharyya(
        nu, mu, gamma, tol,
    )?))
}

/// Precomputed log-density `log(dν/dμ)` for a non-singular pair with
/// trace-class `S`.
#[derive(Debug, Clone)]
pub struct RadonNikodym {
    whitener: DMatrix<f64>,
    reference_mean: DVector<f64>,
    /// `S(I − S)^{-1}`
    quad: DMatrix<f64>,
    /// `(I − S)^{-1}δ`
    linear: DVector<f64>,
    constant: f64,
}

impl RadonNikodym {
    pub fn new(nu: &GaussianMeasure, mu: &GaussianMeasure, tol: &ToleranceConfig) -> Result<Self> {
        let data = equivalence_data(nu, mu, tol)?;
        Self::from_data(&data, mu)
    }

    pub fn from_data(data: &EquivalenceData, mu: &GaussianMeasure) -> Result<Self> {
        if data.singular {
            return Err(Error::SingularPair {
                max_alpha: data.max_alpha(),
            });
        }
        let spec = &data.s_spectrum;
        let quad = spec.map(|a| a / (1.0 - a));
        let resolvent = spec.map(|a| 1.0 / (1.0 - a));
        let linear = &resolvent * &data.delta;
        let logdet: f64 = spec.eigenvalues.iter().map(|a| (-a).ln_1p()).sum();
        let constant = -0.5 * logdet - 0.5 * data.delta.dot(&linear);
        Ok(Self {
            whitener: data.whitener.matrix().clone(),
            reference_mean: mu.mean().clone(),
            quad,
            linear,
            constant,
        })
    }

    pub fn dim(&self) -> usize {
        self.reference_mean.len()
    }

    pub fn log_density(&self, x: &DVector<f64>) -> Result<f64> {
        check_dims(self.dim(), x.len())?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("point"));
        }
        let xt = &self.whitener * (x - &self.reference_mean);
        Ok(self.constant - 0.5 * xt.dot(&(&self.quad * &xt)) + xt.dot(&self.linear))
    }
}

/// `log(dν/dμ)(x)`.
pub fn log_radon_nikodym(
    x: &DVector<f64>,
    nu: &GaussianMeasure,
    mu: &GaussianMeasure,
    tol: &ToleranceConfig,
) -> Result<f64> {
    RadonNikodym::new(nu, mu, tol)?.log_density(x)
}
