//! Fixtures shared by the criterion benchmarks.

use gaussdiv::lab::{gen_measure, RngSeed, SpectrumFamily};
use gaussdiv::GaussianMeasure;

/// A seeded pair of measures with power-law spectra, `ν` more concentrated
/// than `μ` so the pair is equivalent.
pub fn power_law_pair(dim: usize, seed: u64) -> (GaussianMeasure, GaussianMeasure) {
    let nu = gen_measure(&SpectrumFamily::power_law(2.0, dim), RngSeed(seed), 0.1)
        .expect("valid family");
    let mu = gen_measure(&SpectrumFamily::power_law(1.5, dim), RngSeed(seed + 1), 0.0)
        .expect("valid family");
    (nu, mu)
}
