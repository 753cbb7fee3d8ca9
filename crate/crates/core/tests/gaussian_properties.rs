mod common;

use common::{chol_logdet, normals, random_measure};
use gaussdiv::lab::{
    gen_measure, geometric_grid, is_monotone_within, sweep_gamma, DivergenceKind, RngSeed,
    SpectrumFamily,
};
use gaussdiv::{
    equivalence_data, exact_bhattacharyya, exact_hellinger, exact_kl, exact_renyi,
    log_radon_nikodym, regularized_bhattacharyya, regularized_hellinger, regularized_kl,
    regularized_renyi, DMatrix, DVector, Divergence, Error, GaussianMeasure, RenyiOrder,
    ToleranceConfig, TraceClassBlock,
};
use proptest::prelude::*;

const TOL: ToleranceConfig = ToleranceConfig::DEFAULT;

fn pair(seed: u64, dim: usize) -> (GaussianMeasure, GaussianMeasure) {
    (
        random_measure(RngSeed(seed), dim, 0.1, 2.0, 0.5),
        random_measure(RngSeed(seed).derive(1), dim, 0.1, 2.0, 0.5),
    )
}

fn log_density(x: &DVector<f64>, m: &GaussianMeasure) -> f64 {
    let c = m.cov().matrix();
    let d = x - m.mean();
    let solved = c.clone().cholesky().unwrap().solve(&d);
    -0.5 * (d.dot(&solved) + chol_logdet(c) + m.dim() as f64 * (2.0 * std::f64::consts::PI).ln())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ranges(seed in any::<u64>(), dim in 1usize..12) {
        let (nu, mu) = pair(seed, dim);
        prop_assert!(exact_kl(&nu, &mu, &TOL).unwrap().value() >= 0.0);
        let b = exact_bhattacharyya(&nu, &mu, &TOL).unwrap().value();
        let bc = (-b).exp();
        prop_assert!(bc > 0.0 && bc <= 1.0);
        let h = exact_hellinger(&nu, &mu, &TOL).unwrap().value();
        prop_assert!((0.0..2f64.sqrt()).contains(&h));
        for gamma in [1.0, 1e-3] {
            prop_assert!(regularized_kl(&nu, &mu, gamma, &TOL).unwrap() >= 0.0);
            let h = regularized_hellinger(&nu, &mu, gamma, &TOL).unwrap();
            prop_assert!((0.0..2f64.sqrt()).contains(&h));
        }
    }

    #[test]
    fn renyi_order_swap(seed in any::<u64>(), dim in 1usize..12, r in 0.01f64..0.99) {
        let (nu, mu) = pair(seed, dim);
        let fwd = exact_renyi(&nu, &mu, RenyiOrder::new(r).unwrap(), &TOL).unwrap().value();
        let bwd = exact_renyi(&mu, &nu, RenyiOrder::new(1.0 - r).unwrap(), &TOL).unwrap().value();
        prop_assert!((fwd - bwd).abs() <= 1e-9 * (1.0 + fwd.abs()), "{} vs {}", fwd, bwd);
        let fwd = regularized_renyi(&nu, &mu, r, 1e-2, &TOL).unwrap();
        let bwd = regularized_renyi(&mu, &nu, 1.0 - r, 1e-2, &TOL).unwrap();
        prop_assert!((fwd - bwd).abs() <= 1e-9 * (1.0 + fwd.abs()), "{} vs {}", fwd, bwd);
    }

    #[test]
    fn radon_nikodym_is_density_ratio(seed in any::<u64>(), dim in 1usize..8) {
        let (nu, mu) = pair(seed, dim);
        let x = DVector::from_vec(normals(RngSeed(seed).derive(5), dim));
        let got = log_radon_nikodym(&x, &nu, &mu, &TOL).unwrap();
        let want = log_density(&x, &nu) - log_density(&x, &mu);
        prop_assert!((got - want).abs() <= 1e-9 * (1.0 + want.abs()), "{} vs {}", got, want);
    }
}

#[test]
fn convergence_on_decaying_spectra() {
    let grid = geometric_grid(1e-1, 1e-8, 8).unwrap();
    let kinds = [
        DivergenceKind::Kl,
        DivergenceKind::Renyi(0.25),
        DivergenceKind::Renyi(0.5),
        DivergenceKind::Renyi(0.75),
        DivergenceKind::Bhattacharyya,
        DivergenceKind::Hellinger,
    ];
    for seed in 0..5 {
        let nu = gen_measure(&SpectrumFamily::power_law(1.5, 10), RngSeed(seed), 0.1).unwrap();
        let mu = gen_measure(&SpectrumFamily::power_law(1.2, 10), RngSeed(seed + 50), 0.1).unwrap();
        for kind in kinds {
            let records = sweep_gamma(&nu, &mu, kind, &grid, &TOL).unwrap();
            assert!(
                is_monotone_within(&records, 1.05),
                "{kind:?} seed {seed}: {records:?}"
            );
            let last = records.last().unwrap();
            assert!(
                last.abs_err < 1e-5 * (1.0 + last.exact.abs()),
                "{kind:?}: {last:?}"
            );
        }
    }
}

#[test]
fn zero_divergence_iff_equal() {
    let (nu, _) = pair(3, 5);
    let data = equivalence_data(&nu, &nu, &TOL).unwrap();
    assert!(data.max_alpha().abs() < 1e-12);
    assert!(data.kl().value().abs() < 1e-12);
    let moved = GaussianMeasure::new(nu.mean().add_scalar(1e-3), nu.cov().clone()).unwrap();
    assert!(exact_kl(&moved, &nu, &TOL).unwrap().value() > 0.0);
}

#[test]
fn degenerate_covariances() {
    // rank-2 covariance in dimension 3
    let v = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 1.0, 0.0, 1.0]);
    let deg =
        GaussianMeasure::centered(TraceClassBlock::from_computed(&v * v.transpose()).unwrap())
            .unwrap();
    let (full, _) = pair(11, 3);
    for gamma in [1e-1, 1e-4] {
        for (a, b) in [(&deg, &full), (&full, &deg), (&deg, &deg)] {
            assert!(regularized_kl(a, b, gamma, &TOL).unwrap().is_finite());
            assert!(regularized_renyi(a, b, 0.3, gamma, &TOL)
                .unwrap()
                .is_finite());
            assert!(regularized_bhattacharyya(a, b, gamma, &TOL)
                .unwrap()
                .is_finite());
        }
    }
    assert!(matches!(
        exact_kl(&full, &deg, &TOL),
        Err(Error::Degenerate { .. })
    ));
    assert!(matches!(
        exact_bhattacharyya(&deg, &deg, &TOL),
        Err(Error::Degenerate { .. })
    ));
    assert!(matches!(
        exact_kl(&deg, &full, &TOL).unwrap(),
        Divergence::Infinite { .. }
    ));
    assert!(matches!(
        log_radon_nikodym(&DVector::zeros(3), &deg, &full, &TOL),
        Err(Error::SingularPair { .. })
    ));
}

#[test]
fn regularized_divergence_grows_as_gamma_shrinks_for_singular_pair() {
    let mu = GaussianMeasure::centered(TraceClassBlock::identity(2)).unwrap();
    let nu =
        GaussianMeasure::centered(TraceClassBlock::from_diagonal(&[1.0, 0.0]).unwrap()).unwrap();
    let mut prev = 0.0;
    for gamma in [1e-1, 1e-3, 1e-5, 1e-7] {
        let v = regularized_kl(&nu, &mu, gamma, &TOL).unwrap();
        assert!(v > prev);
        prev = v;
    }
}

#[test]
fn measure_json_format() {
    let (nu, _) = pair(2, 3);
    let json = serde_json::to_value(&nu).unwrap();
    assert_eq!(json["dim"], 3);
    assert_eq!(json["cov"].as_array().unwrap().len(), 3);
    let back: GaussianMeasure = serde_json::from_value(json).unwrap();
    assert_eq!(back, nu);
    let bad = r#"{"dim": 2, "mean": [0.0, 0.0], "cov": [[1.0, 0.0], [0.0, -1.0]]}"#;
    assert!(serde_json::from_str::<GaussianMeasure>(bad).is_err());
}
