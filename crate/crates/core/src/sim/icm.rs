use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use super::replicate_rng;
use crate::error::{Error, Result};
use crate::matrix::DataMatrix;

/// Law of the standardized innovations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Innovation {
    Normal,
    /// `Exp(1) − 1`.
    Exponential,
    /// `t_ν` scaled to unit variance; ν ≥ 5 keeps the fourth moment finite.
    StudentT { df: f64 },
}

impl Innovation {
    fn validate(&self) -> Result<()> {
        if let Innovation::StudentT { df } = self {
            if !(*df >= 5.0) {
                return Err(Error::InvalidArgument(format!(
                    "t innovations need df >= 5, got {df}"
                )));
            }
        }
        Ok(())
    }

    fn sampler(&self) -> Result<Sampler> {
        self.validate()?;
        Ok(match *self {
            Innovation::Normal => Sampler::Normal,
            Innovation::Exponential => Sampler::Exponential,
            Innovation::StudentT { df } => Sampler::T(
                StudentT::new(df).map_err(|e| Error::Domain(e.to_string()))?,
                ((df - 2.0) / df).sqrt(),
            ),
        })
    }
}

enum Sampler {
    Normal,
    Exponential,
    T(StudentT<f64>, f64),
}

impl Sampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Normal => StandardNormal.sample(rng),
            Sampler::Exponential => {
                let e: f64 = Exp1.sample(rng);
                e - 1.0
            }
            Sampler::T(law, scale) => scale * law.sample(rng),
        }
    }
}

/// The mixing matrix `Γ` with `ΓΓᵀ = Σ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mixing {
    Identity,
    /// Standard deviations of independent coordinates.
    Diagonal { sd: Vec<f64> },
    /// `Σ_ij = ρ^|i−j|`, generated by the AR(1) recursion.
    Ar1 { rho: f64 },
    /// `Σ = (1−ρ)I + ρ11ᵀ`, ρ ∈ [0, 1).
    CompoundSymmetry { rho: f64 },
    /// A dense p×m matrix.
    Dense { gamma: DMatrix<f64> },
}

/// Independent component model `y = μ + Γz`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IcmSpec {
    pub mu: DVector<f64>,
    pub mixing: Mixing,
    pub innovation: Innovation,
}

impl IcmSpec {
    /// Zero-mean model of dimension `p`.
    pub fn centered(p: usize, mixing: Mixing, innovation: Innovation) -> Self {
        Self {
            mu: DVector::zeros(p),
            mixing,
            innovation,
        }
    }

    pub fn p(&self) -> usize {
        self.mu.len()
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.p();
        if p == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        if self.mu.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("mean vector has non-finite entries".into()));
        }
        self.innovation.validate()?;
        match &self.mixing {
            Mixing::Identity => {}
            Mixing::Diagonal { sd } => {
                if sd.len() != p {
                    return Err(Error::DimensionMismatch {
                        expected: p,
                        actual: sd.len(),
                    });
                }
                if sd.iter().any(|s| !s.is_finite() || *s < 0.0) {
                    return Err(Error::InvalidArgument("standard deviations must be finite and >= 0".into()));
                }
            }
            Mixing::Ar1 { rho } => {
                if !(rho.abs() < 1.0) {
                    return Err(Error::InvalidArgument(format!("AR(1) needs |rho| < 1, got {rho}")));
                }
            }
            Mixing::CompoundSymmetry { rho } => {
                if !(0.0..1.0).contains(rho) {
                    return Err(Error::InvalidArgument(format!(
                        "compound symmetry needs 0 <= rho < 1, got {rho}"
                    )));
                }
            }
            Mixing::Dense { gamma } => {
                if gamma.nrows() != p {
                    return Err(Error::DimensionMismatch {
                        expected: p,
                        actual: gamma.nrows(),
                    });
                }
                if gamma.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidArgument("mixing matrix has non-finite entries".into()));
                }
            }
        }
        Ok(())
    }

    /// The population covariance `ΓΓᵀ` (dense p×p).
    pub fn sigma(&self) -> DMatrix<f64> {
        let p = self.p();
        match &self.mixing {
            Mixing::Identity => DMatrix::identity(p, p),
            Mixing::Diagonal { sd } => {
                DMatrix::from_diagonal(&DVector::from_iterator(p, sd.iter().map(|s| s * s)))
            }
            Mixing::Ar1 { rho } => {
                DMatrix::from_fn(p, p, |i, j| rho.powi((i as i32 - j as i32).abs()))
            }
            Mixing::CompoundSymmetry { rho } => {
                DMatrix::from_fn(p, p, |i, j| if i == j { 1.0 } else { *rho })
            }
            Mixing::Dense { gamma } => gamma * gamma.transpose(),
        }
    }

    fn draw_row<R: Rng + ?Sized>(&self, rng: &mut R, z: &Sampler, out: &mut [f64]) {
        let p = self.p();
        match &self.mixing {
            Mixing::Identity => out.iter_mut().for_each(|v| *v = z.sample(rng)),
            Mixing::Diagonal { sd } => out.iter_mut().zip(sd).for_each(|(v, s)| *v = s * z.sample(rng)),
            Mixing::Ar1 { rho } => {
                let w = (1.0 - rho * rho).sqrt();
                let mut prev = z.sample(rng);
                out[0] = prev;
                for v in out.iter_mut().skip(1) {
                    prev = rho * prev + w * z.sample(rng);
                    *v = prev;
                }
            }
            Mixing::CompoundSymmetry { rho } => {
                let common = rho.sqrt() * z.sample(rng);
                let w = (1.0 - rho).sqrt();
                out.iter_mut().for_each(|v| *v = common + w * z.sample(rng));
            }
            Mixing::Dense { gamma } => {
                let zs: Vec<f64> = (0..gamma.ncols()).map(|_| z.sample(rng)).collect();
                for (i, v) in out.iter_mut().enumerate().take(p) {
                    *v = (0..gamma.ncols()).map(|j| gamma[(i, j)] * zs[j]).sum();
                }
            }
        }
        for (v, m) in out.iter_mut().zip(self.mu.iter()) {
            *v += m;
        }
    }
}

/// `n` iid rows from the model using the given RNG.
pub fn icm_generate_with<R: Rng>(spec: &IcmSpec, n: usize, rng: &mut R) -> Result<DataMatrix> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one row".into()));
    }
    let z = spec.innovation.sampler()?;
    let p = spec.p();
    let mut data = vec![0.0; n * p];
    for row in data.chunks_mut(p) {
        spec.draw_row(rng, &z, row);
    }
    DataMatrix::from_row_slice(n, p, &data)
}

/// `n` iid rows from the model, reproducible per seed.
pub fn icm_generate(spec: &IcmSpec, n: usize, seed: u64) -> Result<DataMatrix> {
    icm_generate_with(spec, n, &mut replicate_rng(seed, 0))
}
