//! Two-sample tests of `H₀: μ₁ = μ₂`.
//!
//! Four normal-approximation tests (BS, CQ, SD, SKK) and seven
//! normal-reference tests whose null distributions are approximated by
//! cumulant-matched chi-square or F laws.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::chi2mix::{chi2_sf, f_sf, pvalue, ApproxParams};
use crate::error::{Error, Result};
use crate::estimators::{adjustment_cpn, est_tr_corr_sq};
use crate::matrix::{
    check_positive_diag, column_variances, corr_scaled, tr_corr_sq, DataMatrix, TraceEngine,
};
use crate::omega::{
    fit_3c, hetero_centered_cumulants, hetero_ws, homo_centered_cumulants, homo_ws,
    omega_traces, second_order, sq_norm, third_order, two_sample_h, weighted_sq_norm,
    Groups,
};
use crate::report::{Statistic, TestReport};

/// Default cutoff of the ZZZ2023 adjustment rule.
pub const DEFAULT_CUTOFF: f64 = 1.2;

const NULL_TEXT: &str = "Difference between two mean vectors is 0";
const ALT_TEXT: &str = "Difference between two mean vectors is not 0";

/// Two samples with a common dimension.
#[derive(Debug, Clone, Copy)]
pub struct TwoSampleInput<'a> {
    pub y1: &'a DataMatrix,
    pub y2: &'a DataMatrix,
}

impl<'a> TwoSampleInput<'a> {
    pub fn new(y1: &'a DataMatrix, y2: &'a DataMatrix) -> Result<Self> {
        if y1.ncols() != y2.ncols() {
            return Err(Error::DimensionMismatch {
                expected: y1.ncols(),
                actual: y2.ncols(),
            });
        }
        for y in [y1, y2] {
            if y.nrows() < 2 {
                return Err(Error::TooFewObservations {
                    required: 2,
                    actual: y.nrows(),
                });
            }
        }
        Ok(Self { y1, y2 })
    }

    /// The same samples in the other order.
    pub fn swapped(&self) -> Self {
        Self {
            y1: self.y2,
            y2: self.y1,
        }
    }

    fn groups(&self, min_n: usize) -> Result<Groups> {
        Groups::new(&[self.y1, self.y2], min_n)
    }
}

/// Options shared by the two-sample procedures.
#[derive(Debug, Clone)]
pub struct TwoSampleOptions {
    /// Cutoff of the ZZZ2023 adjustment rule.
    pub cutoff: f64,
    /// Label printed in the `Data:` line.
    pub data_name: String,
}

impl Default for TwoSampleOptions {
    fn default() -> Self {
        Self {
            cutoff: DEFAULT_CUTOFF,
            data_name: "group1 and group2".to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum TwoSampleTest {
    #[value(name = "bs1996")]
    Bs1996,
    #[value(name = "cq2010")]
    Cq2010,
    #[value(name = "sd2008")]
    Sd2008,
    #[value(name = "skk2013")]
    Skk2013,
    #[value(name = "zgzc2020")]
    Zgzc2020,
    #[value(name = "zzgz2021")]
    Zzgz2021,
    #[value(name = "zwz2023")]
    Zwz2023,
    #[value(name = "zzz2020")]
    Zzz2020,
    #[value(name = "zzz2023")]
    Zzz2023,
    #[value(name = "zz2022-ts")]
    #[serde(rename = "zz2022-ts")]
    Zz2022Ts,
    #[value(name = "zz2022-tsbf")]
    #[serde(rename = "zz2022-tsbf")]
    Zz2022Tsbf,
}

impl TwoSampleTest {
    pub const ALL: [TwoSampleTest; 11] = [
        TwoSampleTest::Bs1996,
        TwoSampleTest::Cq2010,
        TwoSampleTest::Sd2008,
        TwoSampleTest::Skk2013,
        TwoSampleTest::Zgzc2020,
        TwoSampleTest::Zzgz2021,
        TwoSampleTest::Zwz2023,
        TwoSampleTest::Zzz2020,
        TwoSampleTest::Zzz2023,
        TwoSampleTest::Zz2022Ts,
        TwoSampleTest::Zz2022Tsbf,
    ];

    pub fn id(self) -> &'static str {
        match self {
            TwoSampleTest::Bs1996 => "bs1996",
            TwoSampleTest::Cq2010 => "cq2010",
            TwoSampleTest::Sd2008 => "sd2008",
            TwoSampleTest::Skk2013 => "skk2013",
            TwoSampleTest::Zgzc2020 => "zgzc2020",
            TwoSampleTest::Zzgz2021 => "zzgz2021",
            TwoSampleTest::Zwz2023 => "zwz2023",
            TwoSampleTest::Zzz2020 => "zzz2020",
            TwoSampleTest::Zzz2023 => "zzz2023",
            TwoSampleTest::Zz2022Ts => "zz2022-ts",
            TwoSampleTest::Zz2022Tsbf => "zz2022-tsbf",
        }
    }

    pub fn method(self) -> &'static str {
        match self {
            TwoSampleTest::Bs1996 => "Bai and Saranadasa (1996)'s test",
            TwoSampleTest::Cq2010 => "Chen and Qin (2010)'s test",
            TwoSampleTest::Sd2008 => "Srivastava and Du (2008)'s test",
            TwoSampleTest::Skk2013 => "Srivastava et al. (2013)'s test",
            TwoSampleTest::Zgzc2020 | TwoSampleTest::Zzz2020 => "Zhang et al. (2020)'s test",
            TwoSampleTest::Zzgz2021 => "Zhang et al. (2021)'s test",
            TwoSampleTest::Zwz2023 => "Zhu et al. (2023)'s test",
            TwoSampleTest::Zzz2023 => "Zhang et al. (2023)'s test",
            TwoSampleTest::Zz2022Ts | TwoSampleTest::Zz2022Tsbf => "Zhang and Zhu (2022)'s test",
        }
    }

    /// Tests calibrated by a chi-square-type (normal-reference) approximation,
    /// as opposed to the normal-approximation tests BS, CQ, SD and SKK.
    pub fn is_normal_reference(self) -> bool {
        !matches!(
            self,
            TwoSampleTest::Bs1996
                | TwoSampleTest::Cq2010
                | TwoSampleTest::Sd2008
                | TwoSampleTest::Skk2013
        )
    }

    /// Tests whose statistic is unchanged by per-coordinate rescaling.
    pub fn is_scale_invariant(self) -> bool {
        matches!(
            self,
            TwoSampleTest::Sd2008
                | TwoSampleTest::Skk2013
                | TwoSampleTest::Zzz2020
                | TwoSampleTest::Zzz2023
        )
    }

    pub fn run(self, input: &TwoSampleInput) -> Result<TestReport> {
        self.run_with(input, &TwoSampleOptions::default())
    }

    pub fn run_with(self, input: &TwoSampleInput, opts: &TwoSampleOptions) -> Result<TestReport> {
        let mut report = match self {
            TwoSampleTest::Bs1996 => ts_bs1996(input),
            TwoSampleTest::Cq2010 => ts_cq2010(input),
            TwoSampleTest::Sd2008 => ts_sd2008(input),
            TwoSampleTest::Skk2013 => ts_skk2013(input),
            TwoSampleTest::Zgzc2020 => ts_zgzc2020(input),
            TwoSampleTest::Zzgz2021 => ts_zzgz2021(input),
            TwoSampleTest::Zwz2023 => ts_zwz2023(input),
            TwoSampleTest::Zzz2020 => ts_zzz2020(input),
            TwoSampleTest::Zzz2023 => ts_zzz2023(input, opts.cutoff),
            TwoSampleTest::Zz2022Ts => ts_zz2022_ts(input),
            TwoSampleTest::Zz2022Tsbf => ts_zz2022_tsbf(input),
        }?;
        report.data_name = opts.data_name.clone();
        Ok(report)
    }
}

impl fmt::Display for TwoSampleTest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for TwoSampleTest {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        TwoSampleTest::ALL
            .into_iter()
            .find(|t| t.id() == key || t.id().replace('-', "") == key.replace(['-', '_'], ""))
            .ok_or_else(|| {
                let ids: Vec<&str> = TwoSampleTest::ALL.iter().map(|t| t.id()).collect();
                Error::InvalidArgument(format!(
                    "unknown two-sample test `{s}`; valid ids: {}",
                    ids.join(", ")
                ))
            })
    }
}

struct Parts {
    statistic_name: &'static str,
    statistic: f64,
    p_value: f64,
    approximation: ApproxParams,
    show_params: bool,
    extra: Vec<(String, f64)>,
}

fn finish(test: TwoSampleTest, g: &Groups, parts: Parts) -> Result<TestReport> {
    if !parts.statistic.is_finite() || !(0.0..=1.0).contains(&parts.p_value) {
        return Err(Error::Numerical {
            test: test.id().into(),
            detail: format!("statistic {} with p-value {}", parts.statistic, parts.p_value),
        });
    }
    let mut parameters: Vec<(String, f64)> = if parts.show_params {
        parts
            .approximation
            .named_values()
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect()
    } else {
        Vec::new()
    };
    parameters.extend(parts.extra);
    Ok(TestReport {
        test: test.id().into(),
        method: test.method().into(),
        statistic: Statistic {
            name: parts.statistic_name.into(),
            value: parts.statistic,
        },
        p_value: parts.p_value,
        parameters,
        estimation_method: parts.approximation.method_name().into(),
        approximation: parts.approximation,
        n: g.n.clone(),
        p: g.p,
        null: NULL_TEXT.into(),
        alternative: ALT_TEXT.into(),
        data_name: TwoSampleOptions::default().data_name,
    })
}

const STANDARD_NORMAL: ApproxParams = ApproxParams::Normal { mean: 0.0, var: 1.0 };

fn numerical(test: TwoSampleTest, detail: String) -> Error {
    Error::Numerical {
        test: test.id().into(),
        detail,
    }
}

fn sizes(g: &Groups) -> (f64, f64, f64) {
    let n1 = g.n[0] as f64;
    let n2 = g.n[1] as f64;
    (n1, n2, n1 + n2)
}

fn mean_diff(g: &Groups) -> DVector<f64> {
    &g.means[0] - &g.means[1]
}

/// Bai–Saranadasa: `T_BS = (n₁n₂/n)‖ȳ₁−ȳ₂‖² − tr Σ̂` standardized by its
/// estimated null standard deviation.
pub fn ts_bs1996(input: &TwoSampleInput) -> Result<TestReport> {
    let test = TwoSampleTest::Bs1996;
    let g = input.groups(2)?;
    let (n1, n2, n) = sizes(&g);
    let pooled = g.pooled()?;
    let s = second_order(&pooled)?;
    let t_bs = n1 * n2 / n * sq_norm(&mean_diff(&g)) - s.trs;
    let sd = (2.0 * (n - 1.0) / (n - 2.0) * s.est2).sqrt();
    let z = t_bs / sd;
    finish(
        test,
        &g,
        Parts {
            statistic_name: "T[BS]",
            statistic: z,
            p_value: pvalue(z, &STANDARD_NORMAL)?,
            approximation: STANDARD_NORMAL,
            show_params: false,
            extra: vec![],
        },
    )
}

/// Centered two-sample statistic `T_ZZ = ‖ȳ₁−ȳ₂‖² − tr Σ̂₁/n₁ − tr Σ̂₂/n₂` and
/// the cumulants of its null mixture (scaled by `n/(n₁n₂)` from those of the
/// contrast form).
fn centered_bf(g: &Groups, third: bool) -> Result<(f64, crate::chi2mix::CumulantTriple)> {
    let (n1, n2, n) = sizes(g);
    let h = two_sample_h(g.n[0], g.n[1]);
    let om = omega_traces(g, &h, third)?;
    let s = n / (n1 * n2);
    let t = sq_norm(&mean_diff(g)) - s * om.tr;
    let k = hetero_centered_cumulants(&om);
    Ok((
        t,
        crate::chi2mix::CumulantTriple {
            k1: 0.0,
            k2: k.k2 * s * s,
            k3: k.k3 * s * s * s,
        },
    ))
}

/// Chen–Qin: the unbiased statistic `T_ZZ` standardized by its estimated
/// standard deviation.
pub fn ts_cq2010(input: &TwoSampleInput) -> Result<TestReport> {
    let test = TwoSampleTest::Cq2010;
    let g = input.groups(3)?;
    let (t, k) = centered_bf(&g, false)?;
    let z = t / k.k2.sqrt();
    finish(
        test,
        &g,
        Parts {
            statistic_name: "T[CQ]",
            statistic: z,
            p_value: pvalue(z, &STANDARD_NORMAL)?,
            approximation: STANDARD_NORMAL,
            show_params: false,
            extra: vec![],
        },
    )
}

/// Srivastava–Du: studentized by the pooled diagonal, with the `c_{p,n}`
/// adjustment of the variance.
pub fn ts_sd2008(input: &TwoSampleInput) -> Result<TestReport> {
    let test = TwoSampleTest::Sd2008;
    let g = input.groups(2)?;
    let (n1, n2, n) = sizes(&g);
    if n <= 4.0 {
        return Err(Error::TooFewObservations {
            required: 5,
            actual: g.total(),
        });
    }
    let p = g.p as f64;
    let pooled = g.pooled()?;
    let d = column_variances(&pooled);
    check_positive_diag(&d)?;
    let trr2 = tr_corr_sq(&pooled, &d)?;
    let cpn = adjustment_cpn(trr2, g.p);
    let num = n1 * n2 / n * weighted_sq_norm(&mean_diff(&g), &d) - (n - 2.0) * p / (n - 4.0);
    let den = (2.0 * est_tr_corr_sq(trr2, g.p, pooled.dof())? * cpn).sqrt();
    let z = num / den;
    finish(
        test,
        &g,
        Parts {
            statistic_name: "T[SD]",
            statistic: z,
            p_value: pvalue(z, &STANDARD_NORMAL)?,
            approximation: STANDARD_NORMAL,
            show_params: false,
            extra: vec![("cpn".into(), cpn)],
        },
    )
}

/// Quantities shared by SKK and ZZZ2023, both studentized by
/// `D̂_n = diag((n₂/n)Σ̂₁ + (n₁/n)Σ̂₂)`.
struct BfDiagonal {
    /// `(n₁n₂/n)(ȳ₁−ȳ₂)ᵀ D̂_n⁻¹ (ȳ₁−ȳ₂)`.
    quad: f64,
    /// Bias-corrected `tr R_n²`.
    trr2_hat: f64,
    cpn: f64,
}

fn bf_diagonal(g: &Groups) -> Result<BfDiagonal> {
    let (n1, n2, n) = sizes(g);
    let dn = column_variances(&g.factors[0]) * (n2 / n) + column_variances(&g.factors[1]) * (n1 / n);
    check_positive_diag(&dn)?;
    let s1 = corr_scaled(&g.factors[0], &dn)?;
    let s2 = corr_scaled(&g.factors[1], &dn)?;
    let engine = TraceEngine::new(vec![&s1, &s2])?;
    let (w1, w2) = (n2 / n, n1 / n);
    let trr2 =
        w1 * w1 * engine.cross(0, 0) + w2 * w2 * engine.cross(1, 1) + 2.0 * w1 * w2 * engine.cross(0, 1);
    let (t1, t2) = (engine.tr(0), engine.tr(1));
    let correction = (n2 * n2 * t1 * t1 / (n1 - 1.0) + n1 * n1 * t2 * t2 / (n2 - 1.0)) / (n * n);
    Ok(BfDiagonal {
        quad: n1 * n2 / n * weighted_sq_norm(&mean_diff(g), &dn),
        trr2_hat: trr2 - correction,
        cpn: adjustment_cpn(trr2, g.p),
    })
}

/// Srivastava–Katayama–Kano: BF version of SD studentized by `D̂_n`.
pub fn ts_skk2013(input: &TwoSampleInput) -> Result<TestReport> {
    let test = TwoSampleTest::Skk2013;
    let g = input.groups(2)?;
    let b = bf_diagonal(&g)?;
    let var = 2.0 * b.trr2_hat * b.cpn;
    if !(var > 0.0) {
        return Err(numerical(test, format!("nonpositive variance estimate {var}")));
    }
    let z = (b.quad - g.p as f64) / var.sqrt();
    finish(
        test,
        &g,
        Parts {
            statistic_name: "T[SKK]",
            statistic: z,
            p_value: pvalue(z, &STANDARD_NORMAL)?,
            approximation: STANDARD_NORMAL,
            show_params: false,
            extra: vec![("cpn".into(), b.cpn)],
        },
    )
}

/// Homoscedastic 2-c test on `(n₁n₂/n)‖ȳ₁−ȳ₂‖²` with the pooled covariance.
pub fn ts_zgzc2020(input: &TwoSampleInput) -> Result<TestReport> {
    let test = TwoSampleTest::Zgzc2020;
    let g = input.groups(2)?;
    let (n1, n2, n) = sizes(&g);
    let s = second_order(&g.pooled()?)?;
    let t = n1 * n2 / n * sq_norm(&mean_diff(&g));
    let params = homo_ws(test.id(), 1.0, &s)?;
    finish(
        test,
        &g,
        Parts {
            statistic_name: "T[ZGZC]",
            statistic: t,
            p_value: pvalue(t, &params)?,
            approximation: params,
            show_params: true,
            extra: vec![],
        },
    )
}

/// Behrens–Fisher 2-c test: same statistic, cumulants of
/// `Σ_n = (n₂/n)Σ₁ + (n₁/n)Σ₂`.
pub fn ts_zzgz2021(input: &TwoSampleInput) -> Result<TestReport> {
    let test = TwoSampleTest::Zzgz2021;
    let g = input.groups(3)?;
    let (n1, n2, n) = sizes(&g);
    let om = omega_traces(&g, &two_sample_h(g.n[0], g.n[1]), false)?;
    let t = n1 * n2 / n * sq_norm(&mean_diff(&g));
    let params = hetero_ws(test.id(), &om)?;
    finish(
        test,
        &g,
        Parts {
            statistic_name: "T[ZZGZ]",
            statistic: t,
            p_value: pvalue(t, &params)?,
            approximation: params,
            show_params: true,
            extra: vec![],
        },
    )
}

/// F-type Behrens–Fisher test: `F = (n₁n₂/n)‖ȳ₁−ȳ₂‖² / tr Σ̂_n`.
pub fn ts_zwz2023(input: &TwoSampleInput) -> Result<TestReport> {
    let test = TwoSampleTest::Zwz2023;
    let g = input.groups(3)?;
    let (n1, n2, n) = sizes(&g);
    let om = omega_traces(&g, &two_sample_h(g.n[0], g.n[1]), false)?;
    let f = n1 * n2 / n * sq_norm(&mean_diff(&g)) / om.tr;
    let df1 = om.sq_tr / om.tr_sq;
    let df2 = om.sq_tr / om.half_var_tr;
    if !(df1 > 0.0 && df2 > 0.0 && df1.is_finite() && df2.is_finite()) {
        return Err(numerical(test, format!("invalid F fit ({df1}, {df2})")));
    }
    let params = ApproxParams::Ftype { df1, df2 };
    finish(
        test,
        &g,
        Parts {
            statistic_name: "T[ZWZ]",
            statistic: f,
            p_value: f_sf(df1, df2, f.max(0.0))?,
            approximation: params,
            show_params: true,
            extra: vec![],
        },
    )
}

/// Scale-invariant homoscedastic test studentized by the pooled diagonal.
pub fn ts_zzz2020(input: &TwoSampleInput) -> Result<TestReport> {
    let test = TwoSampleTest::Zzz2020;
    let g = input.groups(2)?;
    let (n1, n2, n) = sizes(&g);
    let p = g.p as f64;
    let pooled = g.pooled()?;
    let d = column_variances(&pooled);
    check_positive_diag(&d)?;
    let trr2 = tr_corr_sq(&pooled, &d)?;
    let t = n1 * n2 / (n * p) * weighted_sq_norm(&mean_diff(&g), &d);
    let df = p * p / est_tr_corr_sq(trr2, g.p, pooled.dof())?;
    finish(
        test,
        &g,
        Parts {
            statistic_name: "T[ZZZ]",
            statistic: t,
            p_value: chi2_sf(df, t * df)?,
            approximation: ApproxParams::Ws { beta: 1.0 / df, df },
            show_params: false,
            extra: vec![("df".into(), df)],
        },
    )
}

/// Scale-invariant Behrens–Fisher test studentized by `D̂_n`.
///
/// The bias-corrected `tr R_n²` is divided by `c*_{n,p}` only when
/// `c*_{n,p} ≤ cutoff`.
pub fn ts_zzz2023(input: &TwoSampleInput, cutoff: f64) -> Result<TestReport> {
    let test = TwoSampleTest::Zzz2023;
    if !(cutoff > 0.0) {
        return Err(Error::InvalidArgument(format!("cutoff must be positive, got {cutoff}")));
    }
    let g = input.groups(2)?;
    let p = g.p as f64;
    let b = bf_diagonal(&g)?;
    let mut trr2_hat = b.trr2_hat;
    if b.cpn <= cutoff {
        trr2_hat /= b.cpn;
    }
    let trr2_hat = trr2_hat.max(p);
    let t = b.quad / p;
    let df = p * p / trr2_hat;
    finish(
        test,
        &g,
        Parts {
            statistic_name: "T[ZZZ]",
            statistic: t,
            p_value: chi2_sf(df, t * df)?,
            approximation: ApproxParams::Ws { beta: 1.0 / df, df },
            show_params: false,
            extra: vec![("df".into(), df), ("cpn".into(), b.cpn)],
        },
    )
}

/// Homoscedastic 3-c test on the unstandardized `T_BS`.
pub fn ts_zz2022_ts(input: &TwoSampleInput) -> Result<TestReport> {
    let test = TwoSampleTest::Zz2022Ts;
    let g = input.groups(2)?;
    let (n1, n2, n) = sizes(&g);
    let pooled = g.pooled()?;
    let s = second_order(&pooled)?;
    let est3 = third_order(&pooled, &s)?;
    let t = n1 * n2 / n * sq_norm(&mean_diff(&g)) - s.trs;
    let params = fit_3c(test.id(), homo_centered_cumulants(1.0, s.m, s.est2, est3))?;
    finish(
        test,
        &g,
        Parts {
            statistic_name: "T_ZZ",
            statistic: t,
            p_value: pvalue(t, &params)?,
            approximation: params,
            show_params: true,
            extra: vec![],
        },
    )
}

/// Behrens–Fisher 3-c test on `T_ZZ = ‖ȳ₁−ȳ₂‖² − tr Σ̂₁/n₁ − tr Σ̂₂/n₂`.
pub fn ts_zz2022_tsbf(input: &TwoSampleInput) -> Result<TestReport> {
    let test = TwoSampleTest::Zz2022Tsbf;
    let g = input.groups(6)?;
    let (t, k) = centered_bf(&g, true)?;
    let params = fit_3c(test.id(), k)?;
    finish(
        test,
        &g,
        Parts {
            statistic_name: "T_ZZ",
            statistic: t,
            p_value: pvalue(t, &params)?,
            approximation: params,
            show_params: true,
            extra: vec![],
        },
    )
}
