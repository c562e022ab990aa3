//! Shared building blocks of the two-sample and GLHT procedures: per-group
//! summaries and estimated power sums of `Ω = Σ_ij h_ij (a_i a_jᵀ) ⊗ ...`,
//! i.e. of the covariance of the contrasted mean stack.

use nalgebra::{DMatrix, DVector};

use crate::chi2mix::{threec_match, ApproxParams, CumulantTriple};
use crate::error::{Error, Result};
use crate::estimators::{est_tr_sigma2, est_tr_sigma2_cross, est_tr_sigma3};
use crate::matrix::{center, compensated_sum, sample_mean, CenteredFactor, DataMatrix, TraceEngine};

/// Means and centered factors of k groups with a common dimension.
pub(crate) struct Groups {
    pub n: Vec<usize>,
    pub p: usize,
    pub means: Vec<DVector<f64>>,
    pub factors: Vec<CenteredFactor>,
}

impl Groups {
    pub(crate) fn new(groups: &[&DataMatrix], min_n: usize) -> Result<Self> {
        let p = groups
            .first()
            .ok_or_else(|| Error::InvalidArgument("no groups supplied".into()))?
            .ncols();
        let mut n = Vec::with_capacity(groups.len());
        let mut means = Vec::with_capacity(groups.len());
        let mut factors = Vec::with_capacity(groups.len());
        for g in groups {
            if g.ncols() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    actual: g.ncols(),
                });
            }
            if g.nrows() < min_n {
                return Err(Error::TooFewObservations {
                    required: min_n,
                    actual: g.nrows(),
                });
            }
            n.push(g.nrows());
            means.push(sample_mean(g));
            factors.push(center(g)?);
        }
        Ok(Self {
            n,
            p,
            means,
            factors,
        })
    }

    pub(crate) fn total(&self) -> usize {
        self.n.iter().sum()
    }

    pub(crate) fn pooled(&self) -> Result<CenteredFactor> {
        CenteredFactor::stack(&self.factors.iter().collect::<Vec<_>>())
    }
}

/// Estimated traces of the heteroscedastic `Ω` for the weight matrix `h`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct OmegaTraces {
    /// `tr Ω̂ = Σ h_ii tr(S_i)/n_i`.
    pub tr: f64,
    /// Unbiased `tr Ω²`.
    pub tr_sq: f64,
    /// Half the variance of `tr Ω̂`: `Σ (h_ii/n_i)² tr Σ_i² /(n_i−1)`; this is
    /// also the diagonal correction in the second cumulant of centered forms.
    pub half_var_tr: f64,
    /// Unbiased `tr² Ω`, clamped below at `tr_sq`.
    pub sq_tr: f64,
    /// Unbiased `tr Ω³` (only when requested).
    pub tr_cube: f64,
    /// `Σ h_ii³ tr Σ_i³ / (n_i³(n_i−1)²)` (only when requested).
    pub diag3: f64,
}

pub(crate) fn omega_traces(groups: &Groups, h: &DMatrix<f64>, third: bool) -> Result<OmegaTraces> {
    let k = groups.factors.len();
    let engine = TraceEngine::new(groups.factors.iter().collect())?;
    let nf: Vec<f64> = groups.n.iter().map(|&v| v as f64).collect();
    let tr: Vec<f64> = (0..k).map(|i| engine.tr(i)).collect();
    let mut cross = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let v = engine.cross(i, j);
            cross[(i, j)] = v;
            cross[(j, i)] = v;
        }
    }
    let mut est2 = Vec::with_capacity(k);
    for i in 0..k {
        est2.push(est_tr_sigma2(cross[(i, i)], tr[i], groups.factors[i].dof())?);
    }

    let mut tr_omega = 0.0;
    let mut tr_sq = 0.0;
    let mut half_var_tr = 0.0;
    for i in 0..k {
        let hi = h[(i, i)] / nf[i];
        let mi = nf[i] - 1.0;
        tr_omega += hi * tr[i];
        half_var_tr += hi * hi * est2[i] / mi;
        for j in 0..k {
            let w = h[(i, j)] * h[(i, j)] / (nf[i] * nf[j]);
            tr_sq += w * if i == j { est2[i] } else { cross[(i, j)] };
        }
    }
    let sq_tr = (tr_omega * tr_omega - 2.0 * half_var_tr).max(tr_sq);

    let mut tr_cube = 0.0;
    let mut diag3 = 0.0;
    if third {
        for i in 0..k {
            let mi = groups.factors[i].dof();
            let est3 = est_tr_sigma3(engine.triple(i, i, i), cross[(i, i)], tr[i], mi)?;
            let hi = h[(i, i)] / nf[i];
            tr_cube += hi.powi(3) * est3;
            diag3 += hi.powi(3) * est3 / ((mi as f64) * (mi as f64));
            for j in 0..k {
                if j == i {
                    continue;
                }
                // the three cyclic placements of (i, i, j) share one value
                let mixed = est_tr_sigma2_cross(engine.triple(i, i, j), tr[i], cross[(i, j)], mi)?;
                tr_cube += 3.0 * h[(i, i)] * h[(i, j)] * h[(i, j)] / (nf[i] * nf[i] * nf[j]) * mixed;
                for l in 0..k {
                    if l == i || l == j {
                        continue;
                    }
                    tr_cube += h[(i, j)] * h[(j, l)] * h[(l, i)] / (nf[i] * nf[j] * nf[l])
                        * engine.triple(i, j, l);
                }
            }
        }
    }
    Ok(OmegaTraces {
        tr: tr_omega,
        tr_sq,
        half_var_tr,
        sq_tr,
        tr_cube,
        diag3,
    })
}

/// Weight matrix of the two-sample contrast `ȳ₁ − ȳ₂` scaled by `n₁n₂/n`.
pub(crate) fn two_sample_h(n1: usize, n2: usize) -> DMatrix<f64> {
    let s = (n1 * n2) as f64 / (n1 + n2) as f64;
    DMatrix::from_row_slice(2, 2, &[s, -s, -s, s])
}

/// Plug-in trace and corrected second-order estimates of one covariance.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SecondOrder {
    pub trs: f64,
    pub trs2: f64,
    pub est2: f64,
    pub tr2: f64,
    pub m: usize,
}

pub(crate) fn second_order(zc: &CenteredFactor) -> Result<SecondOrder> {
    let trs = crate::matrix::tr_cov(zc);
    let trs2 = crate::matrix::tr_cov_sq(zc);
    let m = zc.dof();
    let est2 = est_tr_sigma2(trs2, trs, m)?;
    Ok(SecondOrder {
        trs,
        trs2,
        est2,
        tr2: crate::estimators::est_tr2_sigma(trs, est2, m)?,
        m,
    })
}

pub(crate) fn third_order(zc: &CenteredFactor, s: &SecondOrder) -> Result<f64> {
    let trs3 = crate::matrix::tr_cov_triple(zc, zc, zc)?;
    est_tr_sigma3(trs3, s.trs2, s.trs, s.m)
}

fn fit_failed(what: &str, detail: String) -> Error {
    Error::Numerical {
        test: what.to_string(),
        detail,
    }
}

/// `β χ²_d` for `Σ_r λ_r χ²_q`: `K₁ = q tr Σ`, `d = q tr²Σ / tr Σ²`.
pub(crate) fn homo_ws(test: &str, q: f64, s: &SecondOrder) -> Result<ApproxParams> {
    let df = q * s.tr2 / s.est2;
    let beta = q * s.trs / df;
    if !(df > 0.0 && beta > 0.0 && df.is_finite() && beta.is_finite()) {
        return Err(fit_failed(test, format!("invalid 2-c fit (df = {df}, beta = {beta})")));
    }
    Ok(ApproxParams::Ws { beta, df })
}

/// `β χ²_d` matching `tr Ω` and `tr Ω²`.
pub(crate) fn hetero_ws(test: &str, om: &OmegaTraces) -> Result<ApproxParams> {
    let df = om.sq_tr / om.tr_sq;
    let beta = om.tr / df;
    if !(df > 0.0 && beta > 0.0 && df.is_finite() && beta.is_finite()) {
        return Err(fit_failed(test, format!("invalid 2-c fit (df = {df}, beta = {beta})")));
    }
    Ok(ApproxParams::Ws { beta, df })
}

/// Cumulants of `Σ_r λ_r (A_r − (q/m) B_r)`, `A_r ~ χ²_q`, `B_r ~ χ²_m`.
pub(crate) fn homo_centered_cumulants(q: f64, m: usize, est2: f64, est3: f64) -> CumulantTriple {
    let m = m as f64;
    CumulantTriple {
        k1: 0.0,
        k2: 2.0 * q * (1.0 + q / m) * est2,
        k3: 8.0 * (q - q * q * q / (m * m)) * est3,
    }
}

/// Cumulants of the heteroscedastic centered statistic `‖Cμ̂‖² − tr Ω̂`.
pub(crate) fn hetero_centered_cumulants(om: &OmegaTraces) -> CumulantTriple {
    CumulantTriple {
        k1: 0.0,
        k2: 2.0 * (om.tr_sq + om.half_var_tr),
        k3: 8.0 * (om.tr_cube - om.diag3),
    }
}

pub(crate) fn fit_3c(test: &str, k: CumulantTriple) -> Result<ApproxParams> {
    threec_match(k).map_err(|e| fit_failed(test, e.to_string()))
}

/// `Σ_j x_j² / d_j`.
pub(crate) fn weighted_sq_norm(x: &DVector<f64>, d: &DVector<f64>) -> f64 {
    compensated_sum(x.iter().zip(d.iter()).map(|(v, w)| v * v / w))
}

pub(crate) fn sq_norm(x: &DVector<f64>) -> f64 {
    compensated_sum(x.iter().map(|v| v * v))
}
