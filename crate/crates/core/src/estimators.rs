//! Bias-corrected estimators of trace functionals, valid under normality.
//!
//! With `S` a sample covariance on `m` degrees of freedom (`mS ~ W_p(m, Σ)`),
//! the plug-in traces are biased upward; the corrections below are unbiased
//! for `tr Σ²`, `tr² Σ` and `tr Σ³`, and for the mixed term `tr(Σ_a² Σ_b)`
//! when `S_b` is independent of `S_a`.

use crate::error::{Error, Result};
use crate::matrix::{self, center, CenteredFactor, DataMatrix};

fn require_dof(m: usize, min: usize) -> Result<()> {
    if m < min {
        Err(Error::InsufficientDof { m, min })
    } else {
        Ok(())
    }
}

/// Unbiased `tr Σ²` from the plug-ins `tr(S²)` and `tr(S)`.
pub fn est_tr_sigma2(trs2_plugin: f64, trs_plugin: f64, m: usize) -> Result<f64> {
    require_dof(m, 3)?;
    let mf = m as f64;
    let v = mf * (mf * trs2_plugin - trs_plugin * trs_plugin) / ((mf - 1.0) * (mf + 2.0));
    Ok(v.max(1e-12 * trs2_plugin))
}

/// Unbiased `tr² Σ`, clamped below at the `tr Σ²` estimate.
pub fn est_tr2_sigma(trs_plugin: f64, trs2_unbiased: f64, m: usize) -> Result<f64> {
    require_dof(m, 3)?;
    let v = trs_plugin * trs_plugin - 2.0 * trs2_unbiased / m as f64;
    Ok(v.max(trs2_unbiased.max(0.0)))
}

/// Unbiased `tr Σ³`.
pub fn est_tr_sigma3(trs3_plugin: f64, trs2_plugin: f64, trs_plugin: f64, m: usize) -> Result<f64> {
    require_dof(m, 5)?;
    let mf = m as f64;
    let cm = mf.powi(4) / ((mf - 1.0) * (mf - 2.0) * (mf + 2.0) * (mf + 4.0));
    Ok(cm
        * (trs3_plugin - 3.0 / mf * trs_plugin * trs2_plugin
            + 2.0 / (mf * mf) * trs_plugin.powi(3)))
}

/// Unbiased `tr(Σ_a² Σ_b)` from `tr(S_a² S_b)`, `tr(S_a)` and `tr(S_a S_b)`,
/// where `S_b` is independent of `S_a` and unbiased for `Σ_b`.
pub fn est_tr_sigma2_cross(trsa2sb: f64, trsa: f64, trsasb: f64, m_a: usize) -> Result<f64> {
    require_dof(m_a, 2)?;
    let mf = m_a as f64;
    Ok(mf * mf / ((mf - 1.0) * (mf + 2.0)) * (trsa2sb - trsa * trsasb / mf))
}

/// Correlation analogue of [`est_tr_sigma2`]: `tr(R̂²) − p²/m`, floored at p.
pub fn est_tr_corr_sq(trr2_plugin: f64, p: usize, m: usize) -> Result<f64> {
    require_dof(m, 3)?;
    let pf = p as f64;
    Ok((trr2_plugin - pf * pf / m as f64).max(pf))
}

/// `c_{p,n} = 1 + tr(R̂²)/p^{3/2}`.
pub fn adjustment_cpn(trr2_plugin: f64, p: usize) -> f64 {
    1.0 + trr2_plugin / (p as f64).powf(1.5)
}

/// Per-group-centered rows stacked together; the divisor is n − k.
pub fn pooled_center(groups: &[DataMatrix]) -> Result<CenteredFactor> {
    if groups.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "pooling needs at least 2 groups, got {}",
            groups.len()
        )));
    }
    let factors = groups.iter().map(center).collect::<Result<Vec<_>>>()?;
    CenteredFactor::stack(&factors.iter().collect::<Vec<_>>())
}

/// Plug-in and corrected trace functionals of one covariance estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEstimates {
    /// `tr(S)`, unbiased for `tr Σ`.
    pub trs: f64,
    /// Plug-in `tr(S²)`.
    pub trs2_plugin: f64,
    /// Unbiased `tr Σ²`.
    pub trs2_hat: f64,
    /// Unbiased `tr² Σ`.
    pub tr2s_hat: f64,
    /// Plug-in `tr(S³)`.
    pub trs3_plugin: f64,
    /// Unbiased `tr Σ³`.
    pub trs3_hat: f64,
    /// Degrees of freedom of `S`.
    pub m: usize,
}

impl TraceEstimates {
    /// Needs m ≥ 5 because of the third-order correction.
    pub fn from_factor(zc: &CenteredFactor) -> Result<Self> {
        let trs = matrix::tr_cov(zc);
        let trs2 = matrix::tr_cov_sq(zc);
        let trs3 = matrix::tr_cov_triple(zc, zc, zc)?;
        Self::from_plugins(trs, trs2, trs3, zc.dof())
    }

    pub fn from_plugins(trs: f64, trs2: f64, trs3: f64, m: usize) -> Result<Self> {
        let trs2_hat = est_tr_sigma2(trs2, trs, m)?;
        Ok(Self {
            trs,
            trs2_plugin: trs2,
            trs2_hat,
            tr2s_hat: est_tr2_sigma(trs, trs2_hat, m)?,
            trs3_plugin: trs3,
            trs3_hat: est_tr_sigma3(trs3, trs2, trs, m)?,
            m,
        })
    }
}
