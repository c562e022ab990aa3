//! Scale-invariant test of a coefficient block in a multivariate regression.

use hdnr::glht::{glht_z3, DesignSpec};
use hdnr::DataMatrix;
use nalgebra::DMatrix;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (n, p) = (60, 200);
    let mut rng = ChaCha12Rng::seed_from_u64(5);

    // intercept, a dose covariate and a batch indicator
    let x = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => 1.0,
        1 => (i % 6) as f64,
        _ => (i % 2) as f64,
    });
    let scales: Vec<f64> = (0..p).map(|_| rng.random_range(0.1..10.0)).collect();
    let y = DMatrix::from_fn(n, p, |i, j| {
        let z: f64 = StandardNormal.sample(&mut rng);
        // coordinates 0..10 respond to dose
        let effect = if j < 10 { 0.25 * x[(i, 1)] } else { 0.0 };
        scales[j] * (effect + 0.25 * x[(i, 2)] + z)
    });
    let y = DataMatrix::new(y)?;

    let dose = DMatrix::from_row_slice(1, 3, &[0.0, 1.0, 0.0]);
    let r = glht_z3(&y, &DesignSpec::new(x.clone(), dose)?)?;
    print!("{r}");

    let batch = DMatrix::from_row_slice(1, 3, &[0.0, 0.0, 1.0]);
    let r = glht_z3(&y, &DesignSpec::new(x, batch)?)?;
    println!("batch effect: T = {:.4}, p = {:.4e}", r.statistic.value, r.p_value);
    Ok(())
}
