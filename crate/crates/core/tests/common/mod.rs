#![allow(dead_code)]

use gaussdiv::lab::rng::{open_unit, standard_normal};
use gaussdiv::lab::{gen_measure, random_orthogonal, RngSeed, SpectrumFamily};
use gaussdiv::{DMatrix, DVector, GaussianMeasure, ShiftedOperator, TraceClassBlock};

pub fn uniforms(seed: RngSeed, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut rng = seed.stream(7);
    (0..n)
        .map(|_| lo + (hi - lo) * open_unit(&mut rng))
        .collect()
}

pub fn normals(seed: RngSeed, n: usize) -> Vec<f64> {
    let mut rng = seed.stream(8);
    (0..n).map(|_| standard_normal(&mut rng)).collect()
}

/// `V diag(eig) Vᵀ` with a seeded random rotation.
pub fn rotated(seed: RngSeed, eig: Vec<f64>) -> DMatrix<f64> {
    let v = random_orthogonal(eig.len(), seed);
    &v * DMatrix::from_diagonal(&DVector::from_vec(eig)) * v.transpose()
}

pub fn random_spd(seed: RngSeed, dim: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    rotated(seed, uniforms(seed.derive(1), dim, lo, hi))
}

/// Positive operator with shift in `[lo, hi]` and block eigenvalues in
/// `[−shift/2, 2]`.
pub fn random_shifted(seed: RngSeed, dim: usize, lo: f64, hi: f64) -> ShiftedOperator {
    let shift = uniforms(seed.derive(2), 1, lo, hi)[0];
    let block = rotated(seed, uniforms(seed.derive(3), dim, -0.5 * shift, 2.0));
    ShiftedOperator::new(TraceClassBlock::from_computed(block).unwrap(), shift).unwrap()
}

pub fn random_measure(
    seed: RngSeed,
    dim: usize,
    lo: f64,
    hi: f64,
    mean_scale: f64,
) -> GaussianMeasure {
    let family = SpectrumFamily::explicit(uniforms(seed.derive(4), dim, lo, hi));
    gen_measure(&family, seed, mean_scale).unwrap()
}

pub fn chol_logdet(m: &DMatrix<f64>) -> f64 {
    let l = m.clone().cholesky().expect("SPD").l();
    2.0 * l.diagonal().iter().map(|d| d.ln()).sum::<f64>()
}
