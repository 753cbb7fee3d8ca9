//! Gaussian sampling and Monte-Carlo oracles.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::rng::{standard_normal, streams, RngSeed};
use crate::error::{Error, Result};
use crate::gaussian::{exact_kl, GaussianMeasure, RadonNikodym};
use crate::operator::{check_dims, psd_sqrt, sym_eigen, TraceClassBlock};
use crate::tolerance::ToleranceConfig;

/// Rows per independently seeded sample chunk.
pub const CHUNK_ROWS: usize = 4096;

/// Rows `x_i = m + C^{1/2} z_i`, shape `n × dim`.
pub fn sample_gaussian(
    measure: &GaussianMeasure,
    n: usize,
    seed: RngSeed,
    tol: &ToleranceConfig,
) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "sample count must be positive".into(),
        ));
    }
    let dim = measure.dim();
    let root = psd_sqrt(measure.cov(), tol)?;
    let root = root.matrix();
    let chunks: Vec<Vec<f64>> = (0..n.div_ceil(CHUNK_ROWS))
        .into_par_iter()
        .map(|c| {
            let rows = CHUNK_ROWS.min(n - c * CHUNK_ROWS);
            let mut rng = seed.stream(streams::SAMPLES + c as u64);
            let mut out = Vec::with_capacity(rows * dim);
            let mut z = DVector::zeros(dim);
            for _ in 0..rows {
                for zi in z.iter_mut() {
                    *zi = standard_normal(&mut rng);
                }
                let x = measure.mean() + root * &z;
                out.extend(x.iter());
            }
            out
        })
        .collect();
    let flat: Vec<f64> = chunks.into_iter().flatten().collect();
    Ok(DMatrix::from_row_slice(n, dim, &flat))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub n: usize,
}

impl McEstimate {
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Self {
            estimate: mean,
            stderr: (var / n as f64).sqrt(),
            n,
        }
    }

    /// `|estimate − target| ≤ k·stderr`. A zero stderr demands exact agreement
    /// up to rounding.
    pub fn within(&self, target: f64, k: f64) -> bool {
        let gap = (self.estimate - target).abs();
        gap <= k * self.stderr || gap <= 1e-12 * (1.0 + target.abs())
    }

    pub fn z_score(&self, target: f64) -> f64 {
        (self.estimate - target) / self.stderr
    }
}

fn map_rows(
    samples: &DMatrix<f64>,
    f: impl Fn(DVector<f64>) -> Result<f64> + Sync,
) -> Result<Vec<f64>> {
    (0..samples.nrows())
        .into_par_iter()
        .map(|i| f(samples.row(i).transpose()))
        .collect()
}

/// Mean of `log(dν/dμ)` over `n` draws from `ν`; targets `D_KL(ν‖μ)`.
pub fn mc_kl_check(
    nu: &GaussianMeasure,
    mu: &GaussianMeasure,
    n: usize,
    seed: RngSeed,
    tol: &ToleranceConfig,
) -> Result<McEstimate> {
    let rn = RadonNikodym::new(nu, mu, tol)?;
    let samples = sample_gaussian(nu, n, seed, tol)?;
    let values = map_rows(&samples, |x| rn.log_density(&x))?;
    Ok(McEstimate::from_values(&values))
}

/// Mean of `dν/dμ` over `n` draws from `μ`; targets 1.
pub fn mc_rn_mass_check(
    nu: &GaussianMeasure,
    mu: &GaussianMeasure,
    n: usize,
    seed: RngSeed,
    tol: &ToleranceConfig,
) -> Result<McEstimate> {
    let rn = RadonNikodym::new(nu, mu, tol)?;
    let samples = sample_gaussian(mu, n, seed, tol)?;
    let values = map_rows(&samples, |x| Ok(rn.log_density(&x)?.exp()))?;
    Ok(McEstimate::from_values(&values))
}

fn require_centered(measure: &GaussianMeasure) -> Result<()> {
    if measure.mean().iter().any(|&v| v != 0.0) {
        return Err(Error::InvalidParameter(
            "measure must have zero mean".into(),
        ));
    }
    Ok(())
}

/// `∫ exp(½⟨My, y⟩ + ⟨b, y⟩) N(0, Q)(dy)
///   = det(I − Q^{1/2}MQ^{1/2})^{-1/2} exp(½‖(I − Q^{1/2}MQ^{1/2})^{-1/2}Q^{1/2}b‖²)`.
pub fn gauss_exp_quadratic(
    measure: &GaussianMeasure,
    m: &TraceClassBlock,
    b: &DVector<f64>,
    tol: &ToleranceConfig,
) -> Result<f64> {
    require_centered(measure)?;
    check_dims(measure.dim(), m.dim())?;
    check_dims(measure.dim(), b.len())?;
    let root = psd_sqrt(measure.cov(), tol)?;
    let k = m.congruence(&root)?;
    let spec = sym_eigen(&k)?;
    let rb = spec.eigenvectors.transpose() * (root.matrix() * b);
    let mut log_value = 0.0;
    for (kappa, z) in spec.eigenvalues.iter().zip(rb.iter()) {
        let pivot = 1.0 - kappa;
        if pivot <= tol.singular_margin {
            return Err(Error::NotPositive {
                what: "I − Q^{1/2}MQ^{1/2}",
                value: pivot,
            });
        }
        log_value += -0.5 * pivot.ln() + 0.5 * z * z / pivot;
    }
    Ok(log_value.exp())
}

/// Monte-Carlo counterpart of [`gauss_exp_quadratic`].
pub fn mc_exp_quadratic(
    measure: &GaussianMeasure,
    m: &TraceClassBlock,
    b: &DVector<f64>,
    n: usize,
    seed: RngSeed,
    tol: &ToleranceConfig,
) -> Result<McEstimate> {
    require_centered(measure)?;
    check_dims(measure.dim(), m.dim())?;
    check_dims(measure.dim(), b.len())?;
    let samples = sample_gaussian(measure, n, seed, tol)?;
    let mm = m.matrix();
    let values = map_rows(
        &samples,
        |y| Ok((0.5 * y.dot(&(mm * &y)) + b.dot(&y)).exp()),
    )?;
    Ok(McEstimate::from_values(&values))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentCheck {
    pub mc: f64,
    pub closed: f64,
    pub stderr: f64,
}

impl MomentCheck {
    pub fn passes(&self, k: f64) -> bool {
        (self.mc - self.closed).abs() <= k * self.stderr
    }
}

/// `∫⟨x−m, a⟩²⟨x−m, b⟩² dN(m, Q) = ⟨a, Qa⟩⟨b, Qb⟩ + 2⟨a, Qb⟩²`, closed form
/// against a sample mean.
pub fn moment4_check(
    measure: &GaussianMeasure,
    a: &DVector<f64>,
    b: &DVector<f64>,
    n: usize,
    seed: RngSeed,
    tol: &ToleranceConfig,
) -> Result<MomentCheck> {
    check_dims(measure.dim(), a.len())?;
    check_dims(measure.dim(), b.len())?;
    let q = measure.cov().matrix();
    let qa = q * a;
    let closed = a.dot(&qa) * b.dot(&(q * b)) + 2.0 * b.dot(&qa).powi(2);
    let samples = sample_gaussian(measure, n, seed, tol)?;
    let m = measure.mean();
    let values = map_rows(&samples, |x| {
        let d = x - m;
        Ok(d.dot(a).powi(2) * d.dot(b).powi(2))
    })?;
    let est = McEstimate::from_values(&values);
    Ok(MomentCheck {
        mc: est.estimate,
        closed,
        stderr: est.stderr,
    })
}

/// The three `(a, b)` probes of the sampler gate: `(e₁, e₁)`, `(e₁, e_d)`
/// and `(𝟙/√d, e₁)`.
pub fn canonical_probes(dim: usize) -> Vec<(DVector<f64>, DVector<f64>)> {
    let e = |k: usize| {
        let mut v = DVector::zeros(dim);
        v[k] = 1.0;
        v
    };
    let ones = DVector::from_element(dim, 1.0 / (dim as f64).sqrt());
    vec![(e(0), e(0)), (e(0), e(dim - 1)), (ones, e(0))]
}

/// Sampler validation that must pass before Radon-Nikodym checks run.
pub fn moment4_gate(
    measure: &GaussianMeasure,
    n: usize,
    seed: RngSeed,
    tol: &ToleranceConfig,
) -> Result<Vec<MomentCheck>> {
    canonical_probes(measure.dim())
        .iter()
        .enumerate()
        .map(|(k, (a, b))| moment4_check(measure, a, b, n, seed.derive(k as u64), tol))
        .collect()
}

pub const GATE_SIGMAS: f64 = 5.0;
pub const RN_SIGMAS: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
pub struct RnCheckReport {
    pub gate: Vec<MomentCheck>,
    pub exact_kl: f64,
    pub kl: McEstimate,
    pub mass: McEstimate,
}

impl RnCheckReport {
    pub fn gate_passed(&self) -> bool {
        self.gate.iter().all(|c| c.passes(GATE_SIGMAS))
    }

    pub fn kl_passed(&self) -> bool {
        self.kl.within(self.exact_kl, RN_SIGMAS)
    }

    pub fn mass_passed(&self) -> bool {
        self.mass.within(1.0, RN_SIGMAS)
    }

    pub fn passed(&self) -> bool {
        self.gate_passed() && self.kl_passed() && self.mass_passed()
    }
}

/// Sampler gate on `ν`, then the KL and unit-mass Radon-Nikodym checks.
pub fn rn_check(
    nu: &GaussianMeasure,
    mu: &GaussianMeasure,
    n: usize,
    seed: RngSeed,
    tol: &ToleranceConfig,
) -> Result<RnCheckReport> {
    let exact = exact_kl(nu, mu, tol)?.finite()?;
    let gate = moment4_gate(nu, n, seed.derive(100), tol)?;
    if let Some(bad) = gate.iter().find(|c| !c.passes(GATE_SIGMAS)) {
        return Err(Error::InvalidParameter(format!(
            "sampler gate failed: mc {} vs closed {} (stderr {})",
            bad.mc, bad.closed, bad.stderr
        )));
    }
    let kl = mc_kl_check(nu, mu, n, seed.derive(200), tol)?;
    let mass = mc_rn_mass_check(nu, mu, n, seed.derive(300), tol)?;
    Ok(RnCheckReport {
        gate,
        exact_kl: exact,
        kl,
        mass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: ToleranceConfig = ToleranceConfig::DEFAULT;

    #[test]
    fn zero_covariance_samples_are_the_mean() {
        let m = GaussianMeasure::new(
            DVector::from_vec(vec![1.0, -2.0]),
            TraceClassBlock::zeros(2),
        )
        .unwrap();
        let s = sample_gaussian(&m, 10, RngSeed(0), &TOL).unwrap();
        for i in 0..10 {
            assert_eq!(s[(i, 0)], 1.0);
            assert_eq!(s[(i, 1)], -2.0);
        }
    }

    #[test]
    fn sample_covariance_converges() {
        let n = 100_000;
        let m = GaussianMeasure::centered(TraceClassBlock::identity(2)).unwrap();
        let s = sample_gaussian(&m, n, RngSeed(12), &TOL).unwrap();
        let cov = s.transpose() * &s / n as f64;
        let bound = 5.0 / (n as f64).sqrt();
        assert!((cov - DMatrix::identity(2, 2)).amax() < bound);
    }

    #[test]
    fn sampling_is_reproducible() {
        let m = GaussianMeasure::scalar(0.3, 2.0).unwrap();
        let a = sample_gaussian(&m, 10_000, RngSeed(5), &TOL).unwrap();
        let b = sample_gaussian(&m, 10_000, RngSeed(5), &TOL).unwrap();
        assert!(a
            .iter()
            .zip(b.iter())
            .all(|(x, y)| x.to_bits() == y.to_bits()));
        let c = sample_gaussian(&m, 10_000, RngSeed(6), &TOL).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn exp_quadratic_closed_forms() {
        let m = GaussianMeasure::scalar(0.0, 1.0).unwrap();
        let zero = TraceClassBlock::zeros(1);
        let b0 = DVector::zeros(1);
        assert!((gauss_exp_quadratic(&m, &zero, &b0, &TOL).unwrap() - 1.0).abs() < 1e-15);
        let half = TraceClassBlock::from_diagonal(&[0.5]).unwrap();
        let v = gauss_exp_quadratic(&m, &half, &b0, &TOL).unwrap();
        assert!((v - 2f64.sqrt()).abs() < 1e-10);
        let v = gauss_exp_quadratic(&m, &half, &DVector::from_element(1, 1.0), &TOL).unwrap();
        assert!((v - 2f64.sqrt() * std::f64::consts::E).abs() < 1e-10);
        let one = TraceClassBlock::from_diagonal(&[1.0]).unwrap();
        assert!(matches!(
            gauss_exp_quadratic(&m, &one, &b0, &TOL),
            Err(Error::NotPositive { .. })
        ));
        let shifted = GaussianMeasure::scalar(1.0, 1.0).unwrap();
        assert!(gauss_exp_quadratic(&shifted, &zero, &b0, &TOL).is_err());
    }

    #[test]
    fn exp_quadratic_matches_quadrature() {
        // Trapezoid rule for ∫ e^{x²/4 + x} φ(x) dx.
        let h = 1e-3;
        let mut acc = 0.0;
        let mut x: f64 = -40.0;
        while x <= 40.0 {
            let phi = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
            acc += (0.25 * x * x + x).exp() * phi * h;
            x += h;
        }
        let m = GaussianMeasure::scalar(0.0, 1.0).unwrap();
        let half = TraceClassBlock::from_diagonal(&[0.5]).unwrap();
        let v = gauss_exp_quadratic(&m, &half, &DVector::from_element(1, 1.0), &TOL).unwrap();
        assert!((v - acc).abs() < 1e-8, "{v} vs {acc}");
    }

    #[test]
    fn moment4_closed_forms() {
        let q2 = GaussianMeasure::centered(TraceClassBlock::identity(2)).unwrap();
        let e1 = DVector::from_vec(vec![1.0, 0.0]);
        let e2 = DVector::from_vec(vec![0.0, 1.0]);
        let c = moment4_check(&q2, &e1, &e2, 1000, RngSeed(1), &TOL).unwrap();
        assert_eq!(c.closed, 1.0);
        let c = moment4_check(&q2, &e1, &e1, 1000, RngSeed(1), &TOL).unwrap();
        assert_eq!(c.closed, 3.0);
        let q = GaussianMeasure::scalar(0.0, 2.0).unwrap();
        let one = DVector::from_element(1, 1.0);
        let c = moment4_check(&q, &one, &one, 1000, RngSeed(1), &TOL).unwrap();
        assert_eq!(c.closed, 12.0);
    }

    #[test]
    fn kl_check_identical_measures() {
        let m = GaussianMeasure::scalar(0.2, 0.7).unwrap();
        let est = mc_kl_check(&m, &m, 5000, RngSeed(2), &TOL).unwrap();
        assert!(est.within(0.0, RN_SIGMAS));
    }
}
