//! One-way MANOVA and a follow-up contrast across four groups.

use hdnr::sim::{icm_generate, IcmSpec, Innovation, Mixing};
use hdnr::{one_way_contrast, DataMatrix, GlhtTest};
use nalgebra::{DMatrix, DVector};

pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = 120;
    let sizes = [20, 12, 16, 30];
    let groups: Vec<DataMatrix> = sizes
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let mut spec = IcmSpec::centered(p, Mixing::CompoundSymmetry { rho: 0.2 + 0.1 * i as f64 }, Innovation::Normal);
            // only the last group is shifted
            if i == 3 {
                spec.mu = DVector::from_element(p, 0.4);
            }
            icm_generate(&spec, n, 10 + i as u64)
        })
        .collect::<Result<_, _>>()?;
    let y: Vec<&DataMatrix> = groups.iter().collect();

    let g = one_way_contrast(4)?;
    println!("H0: all four means equal");
    for test in GlhtTest::ALL {
        let r = test.run(&y, &g)?;
        println!("  {:<12} p = {:.4e}", test.id(), r.p_value);
    }

    // groups 1 and 2 only
    let g12 = DMatrix::from_row_slice(1, 4, &[1.0, -1.0, 0.0, 0.0]);
    print!("{}", GlhtTest::Zzg2022.run(&y, &g12)?);
    Ok(())
}
