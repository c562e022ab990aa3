//! Dense reference implementations used as oracles: every quantity is formed
//! from explicit p×p covariance matrices, with no Gram-space shortcuts.
#![allow(dead_code)]

use hdnr::DataMatrix;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn random_matrix(n: usize, p: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(n, p, |_, _| StandardNormal.sample(&mut rng))
}

/// Correlated columns with unequal scales and a nonzero mean.
pub fn random_data(n: usize, p: usize, seed: u64, scale: f64) -> DataMatrix {
    let z = random_matrix(n, p, seed);
    let mix = random_matrix(p, p, seed ^ 0xabcdef) * 0.3 + DMatrix::identity(p, p);
    let mut x = z * mix.transpose();
    for j in 0..p {
        let s = scale * (1.0 + j as f64 / p as f64);
        for i in 0..n {
            x[(i, j)] = x[(i, j)] * s + 0.5 * j as f64;
        }
    }
    DataMatrix::new(x).unwrap()
}

pub fn mean(x: &DataMatrix) -> DVector<f64> {
    let v = x.values();
    DVector::from_fn(v.ncols(), |j, _| v.column(j).mean())
}

pub fn cov(x: &DataMatrix) -> DMatrix<f64> {
    let v = x.values();
    let m = mean(x);
    let mut c = v.clone();
    for j in 0..v.ncols() {
        for i in 0..v.nrows() {
            c[(i, j)] -= m[j];
        }
    }
    c.transpose() * &c / (v.nrows() as f64 - 1.0)
}

pub fn tr(a: &DMatrix<f64>) -> f64 {
    a.trace()
}

pub fn est2(s: &DMatrix<f64>, m: f64) -> f64 {
    let t = s.trace();
    let t2 = (s * s).trace();
    m * (m * t2 - t * t) / ((m - 1.0) * (m + 2.0))
}

pub fn est3(s: &DMatrix<f64>, m: f64) -> f64 {
    let t = s.trace();
    let t2 = (s * s).trace();
    let t3 = (s * s * s).trace();
    let c = m.powi(4) / ((m - 1.0) * (m - 2.0) * (m + 2.0) * (m + 4.0));
    c * (t3 - 3.0 / m * t * t2 + 2.0 / (m * m) * t.powi(3))
}

/// Unbiased tr(Σa² Σb), Sa on `m` degrees of freedom.
pub fn mixed(sa: &DMatrix<f64>, sb: &DMatrix<f64>, m: f64) -> f64 {
    m * m / ((m - 1.0) * (m + 2.0)) * ((sa * sa * sb).trace() - sa.trace() * (sa * sb).trace() / m)
}

pub fn diag_inv_scale(s: &DMatrix<f64>, d: &DVector<f64>) -> DMatrix<f64> {
    let p = s.nrows();
    DMatrix::from_fn(p, p, |i, j| s[(i, j)] / (d[i] * d[j]).sqrt())
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

#[macro_export]
macro_rules! assert_close {
    ($a:expr, $b:expr, $rel:expr) => {{
        let (a, b): (f64, f64) = ($a, $b);
        assert!(
            $crate::common::close(a, b, $rel),
            "{} = {a} vs {} = {b} (rel {})",
            stringify!($a),
            stringify!($b),
            (a - b).abs() / a.abs().max(b.abs())
        );
    }};
}
