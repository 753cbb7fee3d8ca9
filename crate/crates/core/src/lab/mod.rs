//! Experiment harness: synthetic measures, seeded sampling, Monte-Carlo
//! oracles and parameter sweeps.

pub mod generate;
pub mod montecarlo;
pub mod rng;
pub mod sweep;

pub use generate::{gen_measure, random_orthogonal, SpectrumFamily, SpectrumKind};
pub use montecarlo::{
    canonical_probes, gauss_exp_quadratic, mc_exp_quadratic, mc_kl_check, mc_rn_mass_check,
    moment4_check, moment4_gate, rn_check, sample_gaussian, McEstimate, MomentCheck, RnCheckReport,
};
pub use montecarlo::{GATE_SIGMAS, RN_SIGMAS};
pub use rng::RngSeed;
pub use sweep::{
    csv_string, geometric_grid, is_monotone_within, linear_grid, sweep_gamma, sweep_r, write_csv,
    DivergenceKind, RenyiSweep, SweepRecord,
};
pub use sweep::{CSV_HEADER, MONOTONE_SLACK};
