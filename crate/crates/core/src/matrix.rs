//! Data containers and the Gram-matrix trace engine.
//!
//! Every trace functional of sample covariance matrices is evaluated either
//! in observation space (n×n Gram matrices, cost O(n²p)) or in variable space
//! (p×p cross-product matrices, cost O(np²)), whichever is cheaper.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Default stabilization constant added to constant-zero columns.
pub const DEFAULT_EPS: f64 = 1e-10;

/// An n×p sample; rows are observations.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: DMatrix<f64>,
}

impl DataMatrix {
    /// Wraps a matrix after checking that every entry is finite.
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::InvalidArgument(format!(
                "empty data matrix ({}x{})",
                values.nrows(),
                values.ncols()
            )));
        }
        for col in 0..values.ncols() {
            for row in 0..values.nrows() {
                if !values[(row, col)].is_finite() {
                    return Err(Error::NonFinite { row, col });
                }
            }
        }
        Ok(Self { values })
    }

    /// Builds a matrix from row vectors, which must all have the same length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        for row in rows {
            if row.len() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    actual: row.len(),
                });
            }
        }
        Self::new(DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]))
    }

    /// Builds an n×p matrix from row-major data.
    pub fn from_row_slice(n: usize, p: usize, data: &[f64]) -> Result<Self> {
        if data.len() != n * p {
            return Err(Error::InvalidArgument(format!(
                "expected {} values for a {n}x{p} matrix, got {}",
                n * p,
                data.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(n, p, data))
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.values
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.values.row(i).iter().copied().collect()
    }

    /// New matrix made of the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> DataMatrix {
        DataMatrix {
            values: self.values.select_rows(rows),
        }
    }

    /// Stacks samples with a common dimension on top of each other.
    pub fn vstack(parts: &[&DataMatrix]) -> Result<DataMatrix> {
        let p = parts
            .first()
            .ok_or_else(|| Error::InvalidArgument("nothing to stack".into()))?
            .ncols();
        let mut n = 0;
        for part in parts {
            check_dims(p, part.ncols())?;
            n += part.nrows();
        }
        let mut out = DMatrix::zeros(n, p);
        let mut offset = 0;
        for part in parts {
            out.rows_mut(offset, part.nrows()).copy_from(&part.values);
            offset += part.nrows();
        }
        Ok(DataMatrix { values: out })
    }
}

fn check_dims(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}

/// Replaces every all-zero column by `eps·(1, 2, …, n)`.
///
/// Distinct entries keep the column variance positive on any subset of two
/// or more rows (e.g. a random split), so diagonal studentization stays
/// defined. Other constant columns are left alone; their zero variance is
/// reported later by [`diag_cov`].
pub fn stabilize(x: &DataMatrix, eps: f64) -> Result<DataMatrix> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "stabilization constant must be finite and positive, got {eps}"
        )));
    }
    let mut values = x.values.clone();
    for mut col in values.column_iter_mut() {
        if col.iter().all(|&v| v == 0.0) {
            for (i, v) in col.iter_mut().enumerate() {
                *v = eps * (i + 1) as f64;
            }
        }
    }
    Ok(DataMatrix { values })
}

/// Coordinate-wise arithmetic mean.
pub fn sample_mean(x: &DataMatrix) -> DVector<f64> {
    let n = x.nrows() as f64;
    DVector::from_iterator(
        x.ncols(),
        x.values.column_iter().map(|c| compensated_sum(c.iter().copied()) / n),
    )
}

/// Column-centered data `Z` together with its transpose and the number of
/// degrees of freedom `m`, so that the sample covariance is `ZᵀZ/m`.
///
/// Both orientations are kept so that n×n Grams (`Z_a Z_bᵀ`) and p×p
/// cross products (`Z_aᵀ Z_a`) are plain matrix products.
#[derive(Debug, Clone)]
pub struct CenteredFactor {
    z: DMatrix<f64>,
    zt: DMatrix<f64>,
    dof: usize,
}

impl CenteredFactor {
    /// Wraps an already centered matrix. `dof` is the covariance divisor.
    pub fn from_centered(z: DMatrix<f64>, dof: usize) -> Result<Self> {
        if dof == 0 {
            return Err(Error::InsufficientDof { m: 0, min: 1 });
        }
        let zt = z.transpose();
        Ok(Self { z, zt, dof })
    }

    pub fn z(&self) -> &DMatrix<f64> {
        &self.z
    }

    pub fn nrows(&self) -> usize {
        self.z.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.z.ncols()
    }

    /// Covariance divisor: n−1 for one sample, n−k pooled, n−f residual.
    pub fn dof(&self) -> usize {
        self.dof
    }

    /// Multiplies column j by `w[j]`.
    pub fn scale_columns(&self, w: &[f64]) -> Result<Self> {
        check_dims(self.ncols(), w.len())?;
        let mut z = self.z.clone();
        for (j, mut col) in z.column_iter_mut().enumerate() {
            col *= w[j];
        }
        let mut zt = self.zt.clone();
        for (j, mut row) in zt.row_iter_mut().enumerate() {
            row *= w[j];
        }
        Ok(Self {
            z,
            zt,
            dof: self.dof,
        })
    }

    /// Stacks factors row-wise; the divisor is the sum of the divisors.
    pub fn stack(parts: &[&CenteredFactor]) -> Result<Self> {
        let p = parts
            .first()
            .ok_or_else(|| Error::InvalidArgument("nothing to stack".into()))?
            .ncols();
        let mut n = 0;
        let mut dof = 0;
        for part in parts {
            check_dims(p, part.ncols())?;
            n += part.nrows();
            dof += part.dof;
        }
        let mut z = DMatrix::zeros(n, p);
        let mut offset = 0;
        for part in parts {
            z.rows_mut(offset, part.nrows()).copy_from(&part.z);
            offset += part.nrows();
        }
        Self::from_centered(z, dof)
    }
}

/// Centers the columns of `x`; requires n ≥ 2.
pub fn center(x: &DataMatrix) -> Result<CenteredFactor> {
    let n = x.nrows();
    if n < 2 {
        return Err(Error::TooFewObservations {
            required: 2,
            actual: n,
        });
    }
    let mean = sample_mean(x);
    let mut z = x.values.clone();
    for (j, mut col) in z.column_iter_mut().enumerate() {
        col.add_scalar_mut(-mean[j]);
    }
    CenteredFactor::from_centered(z, n - 1)
}

/// Which space a quadratic trace is evaluated in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GramPath {
    /// Cheaper of the two.
    Auto,
    /// n×n Gram matrices, O(n²p).
    Observation,
    /// p×p cross products, O(np²).
    Variable,
}

/// `tr(Σ̂) = ‖Z‖²_F / m`.
pub fn tr_cov(zc: &CenteredFactor) -> f64 {
    compensated_sum(zc.z.iter().map(|v| v * v)) / zc.dof as f64
}

/// `tr(Σ̂²)`, using the p×p path when p ≤ n and the n×n path otherwise.
pub fn tr_cov_sq(zc: &CenteredFactor) -> f64 {
    tr_cov_sq_with(zc, GramPath::Auto)
}

pub fn tr_cov_sq_with(zc: &CenteredFactor, path: GramPath) -> f64 {
    let m = zc.dof as f64;
    let variable = match path {
        GramPath::Auto => zc.ncols() <= zc.nrows(),
        GramPath::Observation => false,
        GramPath::Variable => true,
    };
    let g = if variable {
        &zc.zt * &zc.z
    } else {
        &zc.z * &zc.zt
    };
    sorted_sum_of_squares(g.as_slice()) / (m * m)
}

/// `tr(Σ̂_a Σ̂_b)`; the result does not depend on the argument order.
pub fn tr_cov_cross(a: &CenteredFactor, b: &CenteredFactor) -> Result<f64> {
    check_dims(a.ncols(), b.ncols())?;
    let p = a.ncols();
    let scale = (a.dof as f64) * (b.dof as f64);
    if a.nrows() * b.nrows() <= p * p {
        let g = &a.z * &b.zt;
        Ok(sorted_sum_of_squares(g.as_slice()) / scale)
    } else {
        let sa = &a.zt * &a.z;
        let sb = &b.zt * &b.z;
        Ok(symmetric_dot(sa.as_slice(), sb.as_slice()) / scale)
    }
}

/// `tr(Σ̂_a Σ̂_b Σ̂_c)`.
pub fn tr_cov_triple(a: &CenteredFactor, b: &CenteredFactor, c: &CenteredFactor) -> Result<f64> {
    check_dims(a.ncols(), b.ncols())?;
    check_dims(a.ncols(), c.ncols())?;
    let p = a.ncols();
    let (na, nb, nc) = (a.nrows(), b.nrows(), c.nrows());
    let scale = (a.dof as f64) * (b.dof as f64) * (c.dof as f64);
    let cost_n = (na * nb + nb * nc + nc * na) * p + na * nb * nc;
    let cost_p = (na + nb + nc) * p * p + p * p * p;
    let raw = if cost_n <= cost_p {
        let gab = &a.z * &b.zt;
        let gbc = &b.z * &c.zt;
        let gac = &a.z * &c.zt;
        // tr(G_ab G_bc G_ca) with G_ca = G_acᵀ
        let m = &gab * &gbc;
        compensated_sum(m.iter().zip(gac.iter()).map(|(x, y)| x * y))
    } else {
        let sa = &a.zt * &a.z;
        let sb = &b.zt * &b.z;
        let sc = &c.zt * &c.z;
        let m = &sa * &sb;
        // tr(M S_c) = Σ M ∘ S_cᵀ and S_c is symmetric
        compensated_sum(m.iter().zip(sc.iter()).map(|(x, y)| x * y))
    };
    Ok(raw / scale)
}

/// Per-coordinate sample variances; zero variance is an error.
pub fn diag_cov(zc: &CenteredFactor) -> Result<DVector<f64>> {
    let d = column_variances(zc);
    check_positive_diag(&d)?;
    Ok(d)
}

pub(crate) fn column_variances(zc: &CenteredFactor) -> DVector<f64> {
    let m = zc.dof as f64;
    DVector::from_iterator(
        zc.ncols(),
        zc.z.column_iter().map(|col| compensated_sum(col.iter().map(|x| x * x)) / m),
    )
}

pub(crate) fn check_positive_diag(d: &DVector<f64>) -> Result<()> {
    match d.iter().position(|&v| !(v > 0.0)) {
        Some(col) => Err(Error::ZeroVariance { col }),
        None => Ok(()),
    }
}

/// `tr(R̂²)` with `R̂ = D^{-1/2} Σ̂ D^{-1/2}` for the supplied diagonal `d`.
pub fn tr_corr_sq(zc: &CenteredFactor, d: &DVector<f64>) -> Result<f64> {
    Ok(tr_cov_sq(&corr_scaled(zc, d)?))
}

/// Factor whose covariance is `D^{-1/2} Σ̂ D^{-1/2}`.
pub fn corr_scaled(zc: &CenteredFactor, d: &DVector<f64>) -> Result<CenteredFactor> {
    check_dims(zc.ncols(), d.len())?;
    let mut w = Vec::with_capacity(d.len());
    for (j, &v) in d.iter().enumerate() {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Domain(format!(
                "diagonal entry {j} must be positive, got {v}"
            )));
        }
        w.push(1.0 / v.sqrt());
    }
    zc.scale_columns(&w)
}

/// Plug-in trace functionals for several factors sharing p, with every Gram
/// product computed once.
pub(crate) struct TraceEngine<'a> {
    factors: Vec<&'a CenteredFactor>,
    space: Space,
}

enum Space {
    /// `grams[i][j] = Z_i Z_jᵀ` for i ≤ j.
    Observation(Vec<Vec<DMatrix<f64>>>),
    /// `cross[i] = Z_iᵀ Z_i`.
    Variable(Vec<DMatrix<f64>>),
}

impl<'a> TraceEngine<'a> {
    pub(crate) fn new(factors: Vec<&'a CenteredFactor>) -> Result<Self> {
        let p = factors
            .first()
            .ok_or_else(|| Error::InvalidArgument("no factors".into()))?
            .ncols();
        for f in &factors {
            check_dims(p, f.ncols())?;
        }
        let n: usize = factors.iter().map(|f| f.nrows()).sum();
        let space = if n <= p {
            let k = factors.len();
            let mut grams = Vec::with_capacity(k);
            for i in 0..k {
                let row = (i..k).map(|j| &factors[i].z * &factors[j].zt).collect();
                grams.push(row);
            }
            Space::Observation(grams)
        } else {
            Space::Variable(factors.iter().map(|f| &f.zt * &f.z).collect())
        };
        Ok(Self { factors, space })
    }

    fn dof(&self, i: usize) -> f64 {
        self.factors[i].dof as f64
    }

    pub(crate) fn tr(&self, i: usize) -> f64 {
        tr_cov(self.factors[i])
    }

    /// `tr(Σ̂_i Σ̂_j)`; i = j gives the plug-in `tr(Σ̂_i²)`.
    pub(crate) fn cross(&self, i: usize, j: usize) -> f64 {
        let raw = match &self.space {
            Space::Observation(g) => {
                let (a, b) = if i <= j { (i, j) } else { (j, i) };
                sorted_sum_of_squares(g[a][b - a].as_slice())
            }
            Space::Variable(s) => symmetric_dot(s[i].as_slice(), s[j].as_slice()),
        };
        raw / (self.dof(i) * self.dof(j))
    }

    /// `tr(Σ̂_i Σ̂_j Σ̂_l)`.
    pub(crate) fn triple(&self, i: usize, j: usize, l: usize) -> f64 {
        let raw = match &self.space {
            Space::Observation(g) => {
                let gab = self.gram(g, i, j);
                let gbc = self.gram(g, j, l);
                let gac = self.gram(g, i, l);
                let m = &gab * &gbc;
                compensated_sum(m.iter().zip(gac.iter()).map(|(x, y)| x * y))
            }
            Space::Variable(s) => {
                let m = &s[i] * &s[j];
                compensated_sum(m.iter().zip(s[l].iter()).map(|(x, y)| x * y))
            }
        };
        raw / (self.dof(i) * self.dof(j) * self.dof(l))
    }

    fn gram(&self, g: &[Vec<DMatrix<f64>>], i: usize, j: usize) -> DMatrix<f64> {
        if i <= j {
            g[i][j - i].clone()
        } else {
            g[j][i - j].transpose()
        }
    }
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Sum of squares in ascending order, so the result depends only on the
/// multiset of entries (a Gram and its transpose give identical results).
fn sorted_sum_of_squares(values: &[f64]) -> f64 {
    let mut sq: Vec<f64> = values.iter().map(|v| v * v).collect();
    sq.sort_unstable_by(f64::total_cmp);
    compensated_sum(sq)
}

fn symmetric_dot(a: &[f64], b: &[f64]) -> f64 {
    compensated_sum(a.iter().zip(b).map(|(x, y)| x * y))
}
