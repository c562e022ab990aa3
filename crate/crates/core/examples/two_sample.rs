//! Every two-sample test on one simulated data set with unequal covariances.

use hdnr::sim::{icm_generate, IcmSpec, Innovation, Mixing};
use hdnr::{TwoSampleInput, TwoSampleTest};
use nalgebra::DVector;

pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = 300;
    let mut shifted = IcmSpec::centered(p, Mixing::Ar1 { rho: 0.6 }, Innovation::Normal);
    // a small shift in the first 30 coordinates
    shifted.mu = DVector::from_fn(p, |j, _| if j < 30 { 0.6 } else { 0.0 });
    let other = IcmSpec::centered(p, Mixing::Ar1 { rho: 0.3 }, Innovation::Normal);

    let y1 = icm_generate(&shifted, 25, 1)?;
    let y2 = icm_generate(&other, 35, 2)?;
    let input = TwoSampleInput::new(&y1, &y2)?;

    println!("{:<14} {:>14} {:>10} {:>12}", "test", "statistic", "df", "p-value");
    for test in TwoSampleTest::ALL {
        let r = test.run(&input)?;
        let df = r.approximation.df().map_or("-".to_string(), |d| format!("{d:.4}"));
        println!("{:<14} {:>14.4} {:>10} {:>12.4e}", test.id(), r.statistic.value, df, r.p_value);
    }

    // the full printed block for one of them
    print!("{}", TwoSampleTest::Zz2022Tsbf.run(&input)?);
    Ok(())
}
