//! Chi-square-type mixtures `T* = Σ c_r χ²_{d_r}`, their cumulants, and the
//! cumulant-matched approximations used to calibrate every test.

pub mod special;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use special::{chi2_cdf, chi2_sf, f_sf, norm_cdf, norm_sf};

/// Skewness threshold below which a 3-c fit falls back to the normal law.
pub const SKEWNESS_GUARD: f64 = 1e-8;

/// `Σ c_r A_r` with independent `A_r ~ χ²_{d_r}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareMixture {
    coeffs: Vec<f64>,
    dfs: Vec<u32>,
}

impl ChiSquareMixture {
    pub fn new(coeffs: Vec<f64>, dfs: Vec<u32>) -> Result<Self> {
        if coeffs.len() != dfs.len() {
            return Err(Error::InvalidArgument(format!(
                "{} coefficients but {} degrees of freedom",
                coeffs.len(),
                dfs.len()
            )));
        }
        if dfs.contains(&0) {
            return Err(Error::InvalidArgument("degrees of freedom must be >= 1".into()));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("coefficients must be finite".into()));
        }
        if !coeffs.iter().any(|&c| c != 0.0) {
            return Err(Error::InvalidArgument("at least one coefficient must be nonzero".into()));
        }
        Ok(Self { coeffs, dfs })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn dfs(&self) -> &[u32] {
        &self.dfs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn cumulants(&self) -> CumulantTriple {
        CumulantTriple {
            k1: cumulant(self, 1),
            k2: cumulant(self, 2),
            k3: cumulant(self, 3),
        }
    }
}

fn cumulant(mix: &ChiSquareMixture, ell: u32) -> f64 {
    let factor = 2f64.powi(ell as i32 - 1) * (1..ell).product::<u32>() as f64;
    let s = crate::matrix::compensated_sum(
        mix.coeffs
            .iter()
            .zip(&mix.dfs)
            .map(|(c, &d)| c.powi(ell as i32) * d as f64),
    );
    factor * s
}

/// `K_ℓ = 2^{ℓ−1}(ℓ−1)! Σ c_r^ℓ d_r` for ℓ ∈ {1, 2, 3}.
pub fn mixture_cumulant(mix: &ChiSquareMixture, ell: u32) -> Result<f64> {
    if !(1..=3).contains(&ell) {
        return Err(Error::InvalidArgument(format!("cumulant order must be 1, 2 or 3, got {ell}")));
    }
    Ok(cumulant(mix, ell))
}

/// First three cumulants of a statistic or of its null mixture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CumulantTriple {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
}

/// A fitted approximation to a null distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ApproxParams {
    /// `β χ²_d`.
    Ws { beta: f64, df: f64 },
    /// `β₀ + β₁ χ²_d`; when `negated` the fit describes `−T`.
    ThreeC {
        beta0: f64,
        beta1: f64,
        df: f64,
        negated: bool,
    },
    /// `F_{d₁,d₂}`.
    Ftype { df1: f64, df2: f64 },
    /// `N(mean, var)`.
    Normal { mean: f64, var: f64 },
}

impl ApproxParams {
    /// Human-readable method name used in reports.
    pub fn method_name(&self) -> &'static str {
        match self {
            ApproxParams::Ws { .. } => "2-c matched chi^2-approximation",
            ApproxParams::ThreeC { .. } => "3-c matched chi^2-approximation",
            ApproxParams::Ftype { .. } => "2-c matched F-approximation",
            ApproxParams::Normal { .. } => "Normal approximation",
        }
    }

    /// Named parameter values in display order.
    pub fn named_values(&self) -> Vec<(&'static str, f64)> {
        match *self {
            ApproxParams::Ws { beta, df } => vec![("df", df), ("beta", beta)],
            ApproxParams::ThreeC {
                beta0,
                beta1,
                df,
                negated,
            } => {
                let mut v = vec![("df", df), ("beta0", beta0), ("beta1", beta1)];
                if negated {
                    v.push(("lower_tail", 1.0));
                }
                v
            }
            ApproxParams::Ftype { df1, df2 } => vec![("df1", df1), ("df2", df2)],
            ApproxParams::Normal { mean, var } => vec![("mean", mean), ("var", var)],
        }
    }

    /// Main degrees-of-freedom parameter, if any.
    pub fn df(&self) -> Option<f64> {
        match *self {
            ApproxParams::Ws { df, .. } | ApproxParams::ThreeC { df, .. } => Some(df),
            ApproxParams::Ftype { df1, .. } => Some(df1),
            ApproxParams::Normal { .. } => None,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            ApproxParams::Ws { beta, df } => beta > 0.0 && df > 0.0,
            ApproxParams::ThreeC {
                beta0, beta1, df, ..
            } => beta0.is_finite() && beta1 > 0.0 && df > 0.0,
            ApproxParams::Ftype { df1, df2 } => df1 > 0.0 && df2 > 0.0,
            ApproxParams::Normal { mean, var } => mean.is_finite() && var > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("invalid approximation parameters {self:?}")))
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive, got {v}")))
    }
}

/// Two-cumulant (Welch–Satterthwaite) match: `β = K₂/(2K₁)`, `d = 2K₁²/K₂`.
pub fn ws_match(k1: f64, k2: f64) -> Result<ApproxParams> {
    positive("K1", k1)?;
    positive("K2", k2)?;
    Ok(ApproxParams::Ws {
        beta: k2 / (2.0 * k1),
        df: 2.0 * k1 * k1 / k2,
    })
}

/// Three-cumulant match `β₀ + β₁χ²_d`.
///
/// A nearly symmetric triple (|K₃| ≤ 1e-8·K₂^{3/2}) yields the normal law;
/// a left-skewed one is fitted to the negated statistic.
pub fn threec_match(k: CumulantTriple) -> Result<ApproxParams> {
    positive("K2", k.k2)?;
    if !(k.k1.is_finite() && k.k3.is_finite()) {
        return Err(Error::Domain(format!("non-finite cumulants {k:?}")));
    }
    if k.k3.abs() <= SKEWNESS_GUARD * k.k2.powf(1.5) {
        return Ok(ApproxParams::Normal {
            mean: k.k1,
            var: k.k2,
        });
    }
    let negated = k.k3 < 0.0;
    let (k1, k3) = if negated { (-k.k1, -k.k3) } else { (k.k1, k.k3) };
    let k2 = k.k2;
    Ok(ApproxParams::ThreeC {
        beta0: k1 - 2.0 * k2 * k2 / k3,
        beta1: k3 / (4.0 * k2),
        df: 8.0 * k2.powi(3) / (k3 * k3),
        negated,
    })
}

/// F-type match: `d₁ = 2K₁ₙ²/K₂ₙ`, `d₂ = 2K₁d²/K₂d`.
pub fn f_match(k1_num: f64, k2_num: f64, k1_den: f64, k2_den: f64) -> Result<ApproxParams> {
    positive("K1 (numerator)", k1_num)?;
    positive("K2 (numerator)", k2_num)?;
    positive("K1 (denominator)", k1_den)?;
    positive("K2 (denominator)", k2_den)?;
    Ok(ApproxParams::Ftype {
        df1: 2.0 * k1_num * k1_num / k2_num,
        df2: 2.0 * k1_den * k1_den / k2_den,
    })
}

/// Upper-tail probability `P(T* ≥ t)` under the fitted approximation.
pub fn pvalue(t: f64, params: &ApproxParams) -> Result<f64> {
    params.validate()?;
    if t.is_nan() {
        return Err(Error::Domain("statistic is NaN".into()));
    }
    let p = match *params {
        ApproxParams::Ws { beta, df } => {
            if t <= 0.0 {
                1.0
            } else {
                chi2_sf(df, t / beta)?
            }
        }
        ApproxParams::ThreeC {
            beta0,
            beta1,
            df,
            negated: false,
        } => {
            let u = (t - beta0) / beta1;
            if u <= 0.0 {
                1.0
            } else {
                chi2_sf(df, u)?
            }
        }
        ApproxParams::ThreeC {
            beta0,
            beta1,
            df,
            negated: true,
        } => {
            // P(T ≥ t) = P(−T ≤ −t)
            let u = (-t - beta0) / beta1;
            if u <= 0.0 {
                0.0
            } else {
                chi2_cdf(df, u)?
            }
        }
        ApproxParams::Ftype { df1, df2 } => {
            if t <= 0.0 {
                1.0
            } else {
                f_sf(df1, df2, t)?
            }
        }
        ApproxParams::Normal { mean, var } => norm_sf((t - mean) / var.sqrt())?,
    };
    Ok(p.clamp(0.0, 1.0))
}
