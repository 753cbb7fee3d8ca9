//! Regularization (`γ`) and order (`r`) sweeps, with CSV output.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{
    equivalence_data, regularized_bhattacharyya, regularized_hellinger, regularized_kl,
    regularized_renyi, Divergence, GaussianMeasure, RenyiOrder,
};
use crate::tolerance::ToleranceConfig;

pub const CSV_HEADER: [&str; 5] = ["param", "regularized", "exact", "abs_err", "rel_err"];

/// Per-step growth allowed in `abs_err` along a decreasing `γ` grid.
pub const MONOTONE_SLACK: f64 = 1.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DivergenceKind {
    Kl,
    Renyi(f64),
    Bhattacharyya,
    Hellinger,
}

impl DivergenceKind {
    pub fn regularized(
        self,
        nu: &GaussianMeasure,
        mu: &GaussianMeasure,
        gamma: f64,
        tol: &ToleranceConfig,
    ) -> Result<f64> {
        match self {
            DivergenceKind::Kl => regularized_kl(nu, mu, gamma, tol),
            DivergenceKind::Renyi(r) => regularized_renyi(nu, mu, r, gamma, tol),
            DivergenceKind::Bhattacharyya => regularized_bhattacharyya(nu, mu, gamma, tol),
            DivergenceKind::Hellinger => regularized_hellinger(nu, mu, gamma, tol),
        }
    }

    pub fn exact(
        self,
        nu: &GaussianMeasure,
        mu: &GaussianMeasure,
        tol: &ToleranceConfig,
    ) -> Result<Divergence> {
        let data = equivalence_data(nu, mu, tol)?;
        match self {
            DivergenceKind::Kl => Ok(data.kl()),
            DivergenceKind::Renyi(r) => data.renyi(RenyiOrder::new(r)?),
            DivergenceKind::Bhattacharyya => Ok(data.bhattacharyya()),
            DivergenceKind::Hellinger => Ok(data.hellinger()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub param: f64,
    pub regularized: f64,
    pub exact: f64,
    pub abs_err: f64,
    pub rel_err: f64,
}

impl SweepRecord {
    pub fn new(param: f64, regularized: f64, exact: f64) -> Self {
        let abs_err = (regularized - exact).abs();
        let rel_err = if abs_err == 0.0 {
            0.0
        } else {
            abs_err / exact.abs()
        };
        Self {
            param,
            regularized,
            exact,
            abs_err,
            rel_err,
        }
    }
}

/// `points` values from `from` to `to`, equally spaced in log scale.
pub fn geometric_grid(from: f64, to: f64, points: usize) -> Result<Vec<f64>> {
    if !(from > 0.0 && to > 0.0 && from.is_finite() && to.is_finite()) || points == 0 {
        return Err(Error::InvalidParameter(format!(
            "geometric grid needs positive endpoints and points, got {from}..{to} x{points}"
        )));
    }
    if points == 1 {
        return Ok(vec![from]);
    }
    let (a, b) = (from.log10(), to.log10());
    let last = (points - 1) as f64;
    Ok((0..points)
        .map(|k| match k {
            0 => from,
            k if k + 1 == points => to,
            k => {
                let e = a + (b - a) * k as f64 / last;
                // exact decades print cleanly in the CSV
                if (e - e.round()).abs() < 1e-12 {
                    10f64.powi(e.round() as i32)
                } else {
                    10f64.powf(e)
                }
            }
        })
        .collect())
}

pub fn linear_grid(from: f64, to: f64, points: usize) -> Result<Vec<f64>> {
    if !(from.is_finite() && to.is_finite()) || points == 0 {
        return Err(Error::InvalidParameter(format!(
            "linear grid needs finite endpoints, got {from}..{to} x{points}"
        )));
    }
    if points == 1 {
        return Ok(vec![from]);
    }
    let last = (points - 1) as f64;
    Ok((0..points)
        .map(|k| {
            if k + 1 == points {
                to
            } else {
                from + (to - from) * k as f64 / last
            }
        })
        .collect())
}

/// Regularized vs exact divergence along a strictly decreasing `γ` grid.
pub fn sweep_gamma(
    nu: &GaussianMeasure,
    mu: &GaussianMeasure,
    kind: DivergenceKind,
    grid: &[f64],
    tol: &ToleranceConfig,
) -> Result<Vec<SweepRecord>> {
    if grid.is_empty() || grid.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
        return Err(Error::InvalidParameter(
            "gamma grid must be non-empty and positive".into(),
        ));
    }
    if grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter(
            "gamma grid must be strictly decreasing".into(),
        ));
    }
    let exact = kind.exact(nu, mu, tol)?.finite()?;
    grid.par_iter()
        .map(|&g| {
            Ok(SweepRecord::new(
                g,
                kind.regularized(nu, mu, g, tol)?,
                exact,
            ))
        })
        .collect()
}

/// `true` if `abs_err` never grows by more than `slack×` from one record to
/// the next.
pub fn is_monotone_within(records: &[SweepRecord], slack: f64) -> bool {
    records
        .windows(2)
        .all(|w| w[1].abs_err <= slack * w[0].abs_err)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenyiSweep {
    pub records: Vec<SweepRecord>,
    /// `D(ν‖μ)`: the `r → 1` limit, at the same `γ` (exact when `γ = 0`).
    pub kl_forward: f64,
    /// `D(μ‖ν)`: the `r → 0` limit.
    pub kl_reverse: f64,
}

/// Rényi divergence along a grid of orders. With `gamma > 0` the
/// `regularized` column holds `D^γ_{R,r}`; with `gamma = 0` it holds the
/// exact value. The `exact` column is always the exact Rényi divergence
/// (`+∞` for singular pairs).
pub fn sweep_r(
    nu: &GaussianMeasure,
    mu: &GaussianMeasure,
    gamma: f64,
    grid: &[f64],
    tol: &ToleranceConfig,
) -> Result<RenyiSweep> {
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "gamma must be >= 0, got {gamma}"
        )));
    }
    if grid.is_empty() {
        return Err(Error::InvalidParameter("r grid must be non-empty".into()));
    }
    let orders: Vec<RenyiOrder> = grid
        .iter()
        .map(|&r| RenyiOrder::new(r))
        .collect::<Result<_>>()?;
    let forward = equivalence_data(nu, mu, tol)?;
    if gamma == 0.0 && forward.singular {
        return Err(Error::SingularPair {
            max_alpha: forward.max_alpha(),
        });
    }
    let records = orders
        .par_iter()
        .map(|&r| {
            let exact = forward.renyi(r)?.value();
            let value = if gamma == 0.0 {
                exact
            } else {
                regularized_renyi(nu, mu, r.value(), gamma, tol)?
            };
            Ok(SweepRecord::new(r.value(), value, exact))
        })
        .collect::<Result<Vec<_>>>()?;
    let (kl_forward, kl_reverse) = if gamma == 0.0 {
        (
            forward.kl().value(),
            equivalence_data(mu, nu, tol)?.kl().value(),
        )
    } else {
        (
            regularized_kl(nu, mu, gamma, tol)?,
            regularized_kl(mu, nu, gamma, tol)?,
        )
    };
    Ok(RenyiSweep {
        records,
        kl_forward,
        kl_reverse,
    })
}

fn fmt17(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

pub fn write_csv<W: Write>(records: &[SweepRecord], out: W) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            fmt17(r.param),
            fmt17(r.regularized),
            fmt17(r.exact),
            fmt17(r.abs_err),
            fmt17(r.rel_err),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(records: &[SweepRecord]) -> String {
    let mut buf = Vec::new();
    write_csv(records, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("csv output is ASCII")
}
