//! Shifted trace-class operator algebra.
//!
//! An operator on the (infinite-dimensional) Hilbert space is modelled as a
//! finite symmetric block acting on `R^dim` plus a scalar multiple of the
//! identity that also acts on the infinite complement:
//!
//! ```text
//!     T + c I  =  (T + c I_dim)  ⊕  c I_tail
//! ```
//!
//! Because every trace-class block vanishes on the tail, the extended trace
//! `tr_X(T + cI) = tr(T) + c` and the extended Fredholm determinant
//! `det_X(T + cI) = c · det(I + T/c)` are computed exactly, without any
//! truncation error. All determinants are evaluated in the log domain from
//! eigenvalues.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance::ToleranceConfig;

const EIG_MAX_ITER: usize = 100_000;

/// A finite symmetric block, the trace-class part of a shifted operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BlockWire", into = "BlockWire")]
pub struct TraceClassBlock {
    entries: DMatrix<f64>,
}

impl TraceClassBlock {
    /// Validates symmetry with the default tolerance and stores `(T + Tᵀ)/2`.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerance(entries, &ToleranceConfig::DEFAULT)
    }

    pub fn with_tolerance(entries: DMatrix<f64>, tol: &ToleranceConfig) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::DimMismatch {
                expected: entries.nrows(),
                found: entries.ncols(),
            });
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("block"));
        }
        let scale = 1.0 + entries.amax();
        let asym = (&entries - entries.transpose()).amax();
        if asym > tol.sym_tol * scale {
            return Err(Error::NotSymmetric(asym));
        }
        Ok(Self::symmetrized(entries))
    }

    /// Builds a block from a computed matrix (products, congruences) whose
    /// asymmetry is rounding only. Skips the tolerance check.
    pub fn from_computed(entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::DimMismatch {
                expected: entries.nrows(),
                found: entries.ncols(),
            });
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("block"));
        }
        Ok(Self::symmetrized(entries))
    }

    fn symmetrized(entries: DMatrix<f64>) -> Self {
        let sym = (&entries + entries.transpose()) * 0.5;
        Self { entries: sym }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            entries: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: DMatrix::identity(dim, dim),
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        if diag.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("diagonal"));
        }
        Ok(Self {
            entries: DMatrix::from_diagonal(&DVector::from_column_slice(diag)),
        })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.norm()
    }

    /// Row-major copy of the entries.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            entries: &self.entries * factor,
        }
    }

    pub fn neg(&self) -> Self {
        self.scaled(-1.0)
    }

    pub fn add(&self, other: &TraceClassBlock) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self {
            entries: &self.entries + &other.entries,
        })
    }

    pub fn sub(&self, other: &TraceClassBlock) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self {
            entries: &self.entries - &other.entries,
        })
    }

    /// `self + c·I_dim` as a plain finite matrix.
    pub fn plus_identity(&self, c: f64) -> DMatrix<f64> {
        let mut m = self.entries.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += c;
        }
        m
    }

    /// Congruence `Wᵀ · self · W` for a symmetric `W`, symmetrized.
    pub fn congruence(&self, w: &TraceClassBlock) -> Result<Self> {
        check_dims(self.dim(), w.dim())?;
        Self::from_computed(&w.entries * &self.entries * &w.entries)
    }

    pub fn apply(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        check_dims(self.dim(), v.len())?;
        Ok(&self.entries * v)
    }
}

#[derive(Serialize, Deserialize)]
struct BlockWire {
    dim: usize,
    block: Vec<Vec<f64>>,
}

impl TryFrom<BlockWire> for TraceClassBlock {
    type Error = Error;

    fn try_from(w: BlockWire) -> Result<Self> {
        if w.block.len() != w.dim {
            return Err(Error::DimMismatch {
                expected: w.dim,
                found: w.block.len(),
            });
        }
        TraceClassBlock::from_rows(&w.block)
    }
}

impl From<TraceClassBlock> for BlockWire {
    fn from(b: TraceClassBlock) -> Self {
        BlockWire {
            dim: b.dim(),
            block: b.rows(),
        }
    }
}

/// `block + shift·I` on the full space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ShiftedWire", into = "ShiftedWire")]
pub struct ShiftedOperator {
    block: TraceClassBlock,
    shift: f64,
}

impl ShiftedOperator {
    pub fn new(block: TraceClassBlock, shift: f64) -> Result<Self> {
        if !shift.is_finite() {
            return Err(Error::NonFinite("shift"));
        }
        Ok(Self { block, shift })
    }

    /// `c·I` with a zero block of the given carrier dimension.
    pub fn scalar(dim: usize, shift: f64) -> Result<Self> {
        Self::new(TraceClassBlock::zeros(dim), shift)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            block: TraceClassBlock::zeros(dim),
            shift: 1.0,
        }
    }

    pub fn block(&self) -> &TraceClassBlock {
        &self.block
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn dim(&self) -> usize {
        self.block.dim()
    }

    /// Positive shift and `block + shift·I_dim` positive definite.
    pub fn check_positive(&self, tol: &ToleranceConfig) -> Result<()> {
        if self.shift <= 0.0 {
            return Err(Error::NotShifted(self.shift));
        }
        let spec = sym_eigen(&self.block)?;
        let min_ratio = spec
            .eigenvalues
            .iter()
            .map(|t| 1.0 + t / self.shift)
            .fold(f64::INFINITY, f64::min);
        if min_ratio <= tol.singular_margin {
            return Err(Error::NotPositive {
                what: "shifted operator",
                value: min_ratio,
            });
        }
        Ok(())
    }

    /// `⟨v, (block + shift·I)^{-1} v⟩` for `v` supported on the carrier,
    /// evaluated spectrally so that small shifts do not cancel.
    pub fn inv_quadratic(&self, v: &DVector<f64>, tol: &ToleranceConfig) -> Result<f64> {
        check_dims(self.dim(), v.len())?;
        if self.shift <= 0.0 {
            return Err(Error::NotShifted(self.shift));
        }
        let spec = sym_eigen(&self.block)?;
        let coords = spec.eigenvectors.transpose() * v;
        let mut acc = 0.0;
        for (t, z) in spec.eigenvalues.iter().zip(coords.iter()) {
            let ratio = 1.0 + t / self.shift;
            if ratio <= tol.singular_margin {
                return Err(Error::NotPositive {
                    what: "shifted operator",
                    value: ratio,
                });
            }
            acc += z * z / (t + self.shift);
        }
        Ok(acc)
    }
}

#[derive(Serialize, Deserialize)]
struct ShiftedWire {
    dim: usize,
    block: Vec<Vec<f64>>,
    shift: f64,
}

impl TryFrom<ShiftedWire> for ShiftedOperator {
    type Error = Error;

    fn try_from(w: ShiftedWire) -> Result<Self> {
        let block = TraceClassBlock::try_from(BlockWire {
            dim: w.dim,
            block: w.block,
        })?;
        ShiftedOperator::new(block, w.shift)
    }
}

impl From<ShiftedOperator> for ShiftedWire {
    fn from(op: ShiftedOperator) -> Self {
        ShiftedWire {
            dim: op.dim(),
            block: op.block.rows(),
            shift: op.shift,
        }
    }
}

/// Eigenpairs of a symmetric block, eigenvalues in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: DVector<f64>,
    /// Column `k` pairs with `eigenvalues[k]`.
    pub eigenvectors: DMatrix<f64>,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V · diag(f(λ)) · Vᵀ`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (k, lam) in self.eigenvalues.iter().enumerate() {
            let fk = f(*lam);
            scaled.column_mut(k).scale_mut(fk);
        }
        scaled * v.transpose()
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.map(|l| l)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn sym_eigen(t: &TraceClassBlock) -> Result<Spectrum> {
    let m = t.matrix();
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("block"));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(Spectrum {
            eigenvalues: DVector::zeros(0),
            eigenvectors: DMatrix::zeros(0, 0),
        });
    }
    let eig =
        SymmetricEigen::try_new(m.clone(), f64::EPSILON, EIG_MAX_ITER).ok_or(Error::EigFailure)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let eigenvectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// `tr_X(T + cI) = tr(T) + c`.
pub fn ext_trace(op: &ShiftedOperator) -> f64 {
    op.block.trace() + op.shift
}

/// `log det_X(T + cI) = log c + Σ log(1 + τ_k / c)`.
pub fn ext_fredholm_logdet(op: &ShiftedOperator, tol: &ToleranceConfig) -> Result<f64> {
    let c = op.shift;
    if c <= 0.0 {
        return Err(Error::NotShifted(c));
    }
    let spec = sym_eigen(&op.block)?;
    let mut acc = c.ln();
    for t in spec.eigenvalues.iter() {
        let x = t / c;
        if 1.0 + x <= tol.singular_margin {
            return Err(Error::NotPositive {
                what: "1 + τ/c",
                value: 1.0 + x,
            });
        }
        acc += x.ln_1p();
    }
    Ok(acc)
}

/// Hilbert-Carleman log-determinant `log det₂(I + T) = Σ [log(1 + τ_k) − τ_k]`.
pub fn carleman_logdet2(t: &TraceClassBlock, tol: &ToleranceConfig) -> Result<f64> {
    let spec = sym_eigen(t)?;
    carleman_logdet2_from_eigenvalues(spec.eigenvalues.iter().copied(), tol)
}

pub(crate) fn carleman_logdet2_from_eigenvalues(
    eigenvalues: impl IntoIterator<Item = f64>,
    tol: &ToleranceConfig,
) -> Result<f64> {
    let mut acc = 0.0;
    for t in eigenvalues {
        if 1.0 + t <= tol.singular_margin {
            return Err(Error::NotPositive {
                what: "1 + τ",
                value: 1.0 + t,
            });
        }
        acc += t.ln_1p() - t;
    }
    Ok(acc)
}

/// `Σ w_i (T_i + c_i I)`.
pub fn shifted_combine(terms: &[(f64, &ShiftedOperator)]) -> Result<ShiftedOperator> {
    let (_, first) = terms
        .first()
        .ok_or_else(|| Error::InvalidParameter("empty combination".into()))?;
    let dim = first.dim();
    let mut block = DMatrix::zeros(dim, dim);
    let mut shift = 0.0;
    for (w, op) in terms {
        check_dims(dim, op.dim())?;
        block += op.block.matrix() * *w;
        shift += w * op.shift;
    }
    ShiftedOperator::new(TraceClassBlock::from_computed(block)?, shift)
}

/// `(T₁ + c₁I)(T₂ + c₂I) = (T₁T₂ + c₁T₂ + c₂T₁) + c₁c₂ I`.
///
/// The block is stored symmetrized. This is exact when the factors commute
/// and always preserves the extended trace.
pub fn shifted_mul(x: &ShiftedOperator, y: &ShiftedOperator) -> Result<ShiftedOperator> {
    check_dims(x.dim(), y.dim())?;
    let a = x.block.matrix();
    let b = y.block.matrix();
    let block = a * b + b * x.shift + a * y.shift;
    ShiftedOperator::new(TraceClassBlock::from_computed(block)?, x.shift * y.shift)
}

/// `(T + cI)^{-1} = [(T + cI_dim)^{-1} − I/c] + (1/c) I`.
///
/// The block is formed spectrally as `−τ / (c(τ + c))`.
pub fn shifted_inv(op: &ShiftedOperator, tol: &ToleranceConfig) -> Result<ShiftedOperator> {
    let c = op.shift;
    if c <= 0.0 {
        return Err(Error::NotShifted(c));
    }
    let spec = sym_eigen(&op.block)?;
    if let Some(bad) = spec
        .eigenvalues
        .iter()
        .map(|t| 1.0 + t / c)
        .find(|r| *r <= tol.singular_margin)
    {
        return Err(Error::NotPositive {
            what: "shifted operator",
            value: bad,
        });
    }
    let block = spec.map(|t| -t / (c * (t + c)));
    ShiftedOperator::new(TraceClassBlock::from_computed(block)?, 1.0 / c)
}

fn psd_spectrum(
    t: &TraceClassBlock,
    what: &'static str,
    tol: &ToleranceConfig,
) -> Result<Spectrum> {
    let mut spec = sym_eigen(t)?;
    for lam in spec.eigenvalues.iter_mut() {
        if *lam < -tol.psd_clip {
            return Err(Error::NotPsd {
                what,
                eigenvalue: *lam,
            });
        }
        if *lam < 0.0 {
            *lam = 0.0;
        }
    }
    Ok(spec)
}

/// Checks `t` is PSD within `psd_clip`.
pub fn check_psd(t: &TraceClassBlock, what: &'static str, tol: &ToleranceConfig) -> Result<()> {
    psd_spectrum(t, what, tol).map(|_| ())
}

pub fn psd_sqrt(t: &TraceClassBlock, tol: &ToleranceConfig) -> Result<TraceClassBlock> {
    let spec = psd_spectrum(t, "block", tol)?;
    TraceClassBlock::from_computed(spec.map(f64::sqrt))
}

/// `T^{-1/2}`; fails with `Degenerate` if any eigenvalue is at or below `clip`.
pub fn psd_inv_sqrt(t: &TraceClassBlock, clip: f64) -> Result<TraceClassBlock> {
    let spec = sym_eigen(t)?;
    let min = spec.min();
    if spec.dim() > 0 && min <= clip {
        return Err(Error::Degenerate {
            what: "block",
            eigenvalue: min,
        });
    }
    TraceClassBlock::from_computed(spec.map(|l| 1.0 / l.sqrt()))
}

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimMismatch { expected, found });
    }
    Ok(())
}
