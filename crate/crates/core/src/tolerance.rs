use crate::error::{Error, Result};

/// Numerical thresholds shared by the operator layer.
///
/// * `sym_tol` - accepted asymmetry, relative to `1 + max|entry|`.
/// * `eig_tol` - reconstruction/orthonormality slack for spectra.
/// * `psd_clip` - eigenvalues in `(-psd_clip, 0)` count as zero.
/// * `singular_margin` - `1 + tau <= singular_margin` counts as singular.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig {
    pub sym_tol: f64,
    pub eig_tol: f64,
    pub psd_clip: f64,
    pub singular_margin: f64,
}

impl ToleranceConfig {
    pub const DEFAULT: ToleranceConfig = ToleranceConfig {
        sym_tol: 1e-10,
        eig_tol: 1e-9,
        psd_clip: 1e-12,
        singular_margin: 1e-10,
    };

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("sym_tol", self.sym_tol),
            ("eig_tol", self.eig_tol),
            ("psd_clip", self.psd_clip),
            ("singular_margin", self.singular_margin),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        Ok(())
    }
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self::DEFAULT
    }
}
