//! General linear hypothesis tests `H₀: GM = 0` for k mean vectors, and the
//! regression form `H₀: CΘ = 0`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::chi2mix::{chi2_sf, pvalue, ApproxParams};
use crate::error::{Error, Result};
use crate::estimators::est_tr_corr_sq;
use crate::matrix::{
    check_positive_diag, column_variances, tr_corr_sq, CenteredFactor, DataMatrix,
};
use crate::omega::{
    fit_3c, hetero_centered_cumulants, hetero_ws, homo_centered_cumulants, homo_ws,
    omega_traces, second_order, sq_norm, third_order, weighted_sq_norm, Groups,
};
use crate::report::{Statistic, TestReport};

const NULL_TEXT: &str = "The general linear hypothesis is true";
const ALT_TEXT: &str = "The general linear hypothesis is not true";

const RANK_TOL: f64 = 1e-10;
const EIGEN_TOL: f64 = 1e-12;

fn numerical_rank(m: &DMatrix<f64>) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOL * max).count()
}

/// A q×k coefficient matrix `G` of full row rank q < k, with group sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct ContrastSpec {
    g: DMatrix<f64>,
    n: Vec<usize>,
}

impl ContrastSpec {
    pub fn new(g: DMatrix<f64>, n: Vec<usize>) -> Result<Self> {
        let (q, k) = g.shape();
        if k != n.len() {
            return Err(Error::DimensionMismatch {
                expected: n.len(),
                actual: k,
            });
        }
        if q == 0 || q >= k {
            return Err(Error::RankDeficient {
                what: "G",
                detail: format!("need 0 < q < k, got a {q}x{k} matrix"),
            });
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("G has non-finite entries".into()));
        }
        if let Some(&bad) = n.iter().find(|&&v| v < 2) {
            return Err(Error::TooFewObservations {
                required: 2,
                actual: bad,
            });
        }
        let rank = numerical_rank(&g);
        if rank != q {
            return Err(Error::RankDeficient {
                what: "G",
                detail: format!("rank {rank} < {q} rows"),
            });
        }
        Ok(Self { g, n })
    }

    pub fn g(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn n(&self) -> &[usize] {
        &self.n
    }

    pub fn q(&self) -> usize {
        self.g.nrows()
    }

    pub fn k(&self) -> usize {
        self.g.ncols()
    }
}

/// `(I_q, −1_q)`: all k means equal (one-way MANOVA).
pub fn one_way_contrast(k: usize) -> Result<DMatrix<f64>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 groups, got {k}")));
    }
    Ok(DMatrix::from_fn(k - 1, k, |i, j| {
        if j == k - 1 {
            -1.0
        } else if i == j {
            1.0
        } else {
            0.0
        }
    }))
}

/// The contrast transform: `A = (GBGᵀ)^{-1/2} G` and `H = AᵀA`, with
/// `B = diag(1/n₁, …, 1/n_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HMatrix {
    pub a: DMatrix<f64>,
    pub h: DMatrix<f64>,
}

impl HMatrix {
    /// `‖(A⊗I_p)μ̂‖² = Σ_r ‖Σ_i a_ri ȳ_i‖²`.
    pub fn statistic(&self, means: &[DVector<f64>]) -> f64 {
        let mut total = 0.0;
        for r in 0..self.a.nrows() {
            let mut v = DVector::zeros(means[0].len());
            for (i, m) in means.iter().enumerate() {
                v.axpy(self.a[(r, i)], m, 1.0);
            }
            total += sq_norm(&v);
        }
        total
    }
}

pub fn build_contrast(spec: &ContrastSpec) -> Result<HMatrix> {
    let b = DMatrix::from_diagonal(&DVector::from_iterator(
        spec.k(),
        spec.n.iter().map(|&v| 1.0 / v as f64),
    ));
    let gbg = &spec.g * b * spec.g.transpose();
    let gbg = (&gbg + gbg.transpose()) * 0.5;
    let eig = gbg.symmetric_eigen();
    let max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    if eig.eigenvalues.iter().any(|&l| !(l > EIGEN_TOL * max)) {
        return Err(Error::RankDeficient {
            what: "GBGᵀ",
            detail: format!("eigenvalues {:?}", eig.eigenvalues.as_slice()),
        });
    }
    let inv_sqrt = eig.eigenvalues.map(|l| 1.0 / l.sqrt());
    let m = &eig.eigenvectors * DMatrix::from_diagonal(&inv_sqrt) * eig.eigenvectors.transpose();
    let a = m * &spec.g;
    let h = a.transpose() * &a;
    let h = (&h + h.transpose()) * 0.5;
    Ok(HMatrix { a, h })
}

/// Regression design `Y = XΘ + E` with hypothesis matrix `C` (q×f).
#[derive(Debug, Clone, PartialEq)]
pub struct DesignSpec {
    x: DMatrix<f64>,
    c: DMatrix<f64>,
}

impl DesignSpec {
    pub fn new(x: DMatrix<f64>, c: DMatrix<f64>) -> Result<Self> {
        let (n, f) = x.shape();
        let (q, fc) = c.shape();
        if fc != f {
            return Err(Error::DimensionMismatch {
                expected: f,
                actual: fc,
            });
        }
        if f + 2 >= n {
            return Err(Error::InsufficientDof {
                m: n.saturating_sub(f),
                min: 3,
            });
        }
        if q == 0 || q >= f {
            return Err(Error::RankDeficient {
                what: "C",
                detail: format!("need 0 < q < f, got a {q}x{f} matrix"),
            });
        }
        if x.iter().chain(c.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("design has non-finite entries".into()));
        }
        let rx = numerical_rank(&x);
        if rx != f {
            return Err(Error::RankDeficient {
                what: "X",
                detail: format!("rank {rx} < {f} columns"),
            });
        }
        let rc = numerical_rank(&c);
        if rc != q {
            return Err(Error::RankDeficient {
                what: "C",
                detail: format!("rank {rc} < {q} rows"),
            });
        }
        Ok(Self { x, c })
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }
}

/// Group-indicator design matrix of a one-way layout with sizes `n`.
pub fn one_way_design(n: &[usize]) -> DMatrix<f64> {
    let total: usize = n.iter().sum();
    let mut x = DMatrix::zeros(total, n.len());
    let mut row = 0;
    for (j, &nj) in n.iter().enumerate() {
        for _ in 0..nj {
            x[(row, j)] = 1.0;
            row += 1;
        }
    }
    x
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
pub enum GlhtTest {
    #[value(name = "zgz2017")]
    #[serde(rename = "zgz2017")]
    Zgz2017,
    #[value(name = "zzg2022")]
    #[serde(rename = "zzg2022")]
    Zzg2022,
    #[value(name = "zz2022-bf")]
    #[serde(rename = "zz2022-bf")]
    Zz2022Bf,
    #[value(name = "zz2022-homo")]
    #[serde(rename = "zz2022-homo")]
    Zz2022Homo,
    #[value(name = "zhou2017")]
    #[serde(rename = "zhou2017")]
    Zhou2017,
    #[value(name = "z3")]
    #[serde(rename = "z3")]
    Z3,
}

impl GlhtTest {
    pub const ALL: [GlhtTest; 6] = [
        GlhtTest::Zgz2017,
        GlhtTest::Zzg2022,
        GlhtTest::Zz2022Bf,
        GlhtTest::Zz2022Homo,
        GlhtTest::Zhou2017,
        GlhtTest::Z3,
    ];

    pub fn id(self) -> &'static str {
        match self {
            GlhtTest::Zgz2017 => "zgz2017",
            GlhtTest::Zzg2022 => "zzg2022",
            GlhtTest::Zz2022Bf => "zz2022-bf",
            GlhtTest::Zz2022Homo => "zz2022-homo",
            GlhtTest::Zhou2017 => "zhou2017",
            GlhtTest::Z3 => "z3",
        }
    }

    pub fn method(self) -> &'static str {
        match self {
            GlhtTest::Zgz2017 => "Zhang et al. (2017)'s test",
            GlhtTest::Zzg2022 => "Zhang et al. (2022)'s test",
            GlhtTest::Zz2022Bf => "Zhang and Zhu (2022)'s test",
            GlhtTest::Zz2022Homo => "Zhu and Zhang (2022)'s test",
            GlhtTest::Zhou2017 => "Zhou et al. (2017)'s test",
            GlhtTest::Z3 => "Zhu et al. (2022)'s test",
        }
    }

    pub fn is_normal_reference(self) -> bool {
        self != GlhtTest::Zhou2017
    }

    /// Runs the test on k groups for `H₀: GM = 0`. The regression-form test
    /// uses the one-way design with `C = G`.
    pub fn run(self, groups: &[&DataMatrix], g: &DMatrix<f64>) -> Result<TestReport> {
        match self {
            GlhtTest::Zgz2017 => glht_zgz2017(groups, g),
            GlhtTest::Zzg2022 => glht_zzg2022(groups, g),
            GlhtTest::Zz2022Bf => glht_zz2022_bf(groups, g),
            GlhtTest::Zz2022Homo => glht_zz2022_homo(groups, g),
            GlhtTest::Zhou2017 => glht_zhou2017(groups, g),
            GlhtTest::Z3 => {
                let n: Vec<usize> = groups.iter().map(|y| y.nrows()).collect();
                let design = DesignSpec::new(one_way_design(&n), g.clone())?;
                let mut report = glht_z3(&DataMatrix::vstack(groups)?, &design)?;
                report.n = n;
                Ok(report)
            }
        }
    }
}

impl fmt::Display for GlhtTest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for GlhtTest {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        GlhtTest::ALL
            .into_iter()
            .find(|t| t.id() == key)
            .ok_or_else(|| {
                let ids: Vec<&str> = GlhtTest::ALL.iter().map(|t| t.id()).collect();
                Error::InvalidArgument(format!(
                    "unknown GLHT test `{s}`; valid ids: {}",
                    ids.join(", ")
                ))
            })
    }
}

struct Prepared {
    groups: Groups,
    contrast: HMatrix,
    q: usize,
    t: f64,
}

fn prepare(ys: &[&DataMatrix], g: &DMatrix<f64>, min_n: usize) -> Result<Prepared> {
    let groups = Groups::new(ys, min_n)?;
    let spec = ContrastSpec::new(g.clone(), groups.n.clone())?;
    let contrast = build_contrast(&spec)?;
    let t = contrast.statistic(&groups.means);
    Ok(Prepared {
        groups,
        contrast,
        q: spec.q(),
        t,
    })
}

#[allow(clippy::too_many_arguments)]
fn report(
    test: GlhtTest,
    n: Vec<usize>,
    p: usize,
    statistic_name: &str,
    statistic: f64,
    approximation: ApproxParams,
    p_value: f64,
    parameters: Vec<(String, f64)>,
) -> Result<TestReport> {
    if !statistic.is_finite() || !(0.0..=1.0).contains(&p_value) {
        return Err(Error::Numerical {
            test: test.id().into(),
            detail: format!("statistic {statistic} with p-value {p_value}"),
        });
    }
    Ok(TestReport {
        test: test.id().into(),
        method: test.method().into(),
        statistic: Statistic {
            name: statistic_name.into(),
            value: statistic,
        },
        p_value,
        parameters,
        estimation_method: approximation.method_name().into(),
        approximation,
        n,
        p,
        null: NULL_TEXT.into(),
        alternative: ALT_TEXT.into(),
        data_name: "Y".into(),
    })
}

fn named(params: &ApproxParams) -> Vec<(String, f64)> {
    params
        .named_values()
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
}

/// Homoscedastic 2-c test on `T = ‖Cμ̂‖²` with the pooled covariance.
pub fn glht_zgz2017(ys: &[&DataMatrix], g: &DMatrix<f64>) -> Result<TestReport> {
    let test = GlhtTest::Zgz2017;
    let pr = prepare(ys, g, 2)?;
    let s = second_order(&pr.groups.pooled()?)?;
    let params = homo_ws(test.id(), pr.q as f64, &s)?;
    let pv = pvalue(pr.t, &params)?;
    report(test, pr.groups.n.clone(), pr.groups.p, "T[ZGZ]", pr.t, params, pv, named(&params))
}

/// Heteroscedastic 2-c test on `T = ‖Cμ̂‖²`.
pub fn glht_zzg2022(ys: &[&DataMatrix], g: &DMatrix<f64>) -> Result<TestReport> {
    let test = GlhtTest::Zzg2022;
    let pr = prepare(ys, g, 3)?;
    let om = omega_traces(&pr.groups, &pr.contrast.h, false)?;
    let params = hetero_ws(test.id(), &om)?;
    let pv = pvalue(pr.t, &params)?;
    report(test, pr.groups.n.clone(), pr.groups.p, "T[ZZG]", pr.t, params, pv, named(&params))
}

/// Heteroscedastic 3-c test on `T = ‖Cμ̂‖² − Σ_i h_ii tr Σ̂_i / n_i`.
pub fn glht_zz2022_bf(ys: &[&DataMatrix], g: &DMatrix<f64>) -> Result<TestReport> {
    let test = GlhtTest::Zz2022Bf;
    let pr = prepare(ys, g, 6)?;
    let om = omega_traces(&pr.groups, &pr.contrast.h, true)?;
    let t = pr.t - om.tr;
    let params = fit_3c(test.id(), hetero_centered_cumulants(&om))?;
    let pv = pvalue(t, &params)?;
    report(test, pr.groups.n.clone(), pr.groups.p, "T[ZZ]", t, params, pv, named(&params))
}

/// Homoscedastic 3-c test on `T = ‖Cμ̂‖² − q tr Σ̂`, Σ̂ pooled with n−k
/// degrees of freedom.
pub fn glht_zz2022_homo(ys: &[&DataMatrix], g: &DMatrix<f64>) -> Result<TestReport> {
    let test = GlhtTest::Zz2022Homo;
    let pr = prepare(ys, g, 2)?;
    let pooled = pr.groups.pooled()?;
    let s = second_order(&pooled)?;
    let est3 = third_order(&pooled, &s)?;
    let q = pr.q as f64;
    let t = pr.t - q * s.trs;
    let params = fit_3c(test.id(), homo_centered_cumulants(q, s.m, s.est2, est3))?;
    let pv = pvalue(t, &params)?;
    report(test, pr.groups.n.clone(), pr.groups.p, "T[ZZ]", t, params, pv, named(&params))
}

/// Normal approximation to the centered heteroscedastic statistic,
/// standardized by the same second cumulant as the 3-c test.
pub fn glht_zhou2017(ys: &[&DataMatrix], g: &DMatrix<f64>) -> Result<TestReport> {
    let test = GlhtTest::Zhou2017;
    let pr = prepare(ys, g, 3)?;
    let om = omega_traces(&pr.groups, &pr.contrast.h, false)?;
    let t = pr.t - om.tr;
    let k = hetero_centered_cumulants(&om);
    let params = ApproxParams::Normal { mean: 0.0, var: k.k2 };
    let pv = pvalue(t, &params)?;
    report(test, pr.groups.n.clone(), pr.groups.p, "T[ZGZ]", t, params, pv, vec![])
}

/// Scale-invariant 2-c test in regression form,
/// `T = (n−f−2)/((n−f)pq) · tr(S_h D̂_e⁻¹)`.
pub fn glht_z3(y: &DataMatrix, design: &DesignSpec) -> Result<TestReport> {
    let test = GlhtTest::Z3;
    let x = design.x();
    let c = design.c();
    let (n, f) = x.shape();
    if y.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: y.nrows(),
        });
    }
    let p = y.ncols();
    let q = c.nrows();
    let xtx = x.transpose() * x;
    let chol = xtx.clone().cholesky().ok_or_else(|| Error::RankDeficient {
        what: "XᵀX",
        detail: "not positive definite".into(),
    })?;
    let theta = chol.solve(&(x.transpose() * y.values()));
    let resid = y.values() - x * &theta;
    let m = n - f;
    let e = CenteredFactor::from_centered(resid, m)?;
    let d = column_variances(&e);
    check_positive_diag(&d)?;

    let u = c * &theta;
    let cov = c * chol.inverse() * c.transpose();
    let w = cov.try_inverse().ok_or_else(|| Error::RankDeficient {
        what: "C(XᵀX)⁻¹Cᵀ",
        detail: "singular".into(),
    })?;
    let w = (&w + w.transpose()) * 0.5;
    // tr(S_h D̂⁻¹) = Σ_j u_jᵀ W u_j / d_j, through a square root of W
    let eig = w.symmetric_eigen();
    let mut trace = 0.0;
    for (r, &lambda) in eig.eigenvalues.iter().enumerate() {
        let proj = eig.eigenvectors.column(r).transpose() * &u;
        trace += lambda * weighted_sq_norm(&proj.transpose(), &d);
    }
    let (mf, pf, qf) = (m as f64, p as f64, q as f64);
    let t = (mf - 2.0) / (mf * pf * qf) * trace;
    let trr2 = tr_corr_sq(&e, &d)?;
    let df = pf * pf * qf / est_tr_corr_sq(trr2, p, m)?;
    let params = ApproxParams::Ws {
        beta: 1.0 / df,
        df,
    };
    let pv = chi2_sf(df, t * df)?;
    report(test, vec![n], p, "T[ZZZ]", t, params, pv, vec![("df".into(), df)])
}
