//! Empirical size of the two-sample tests under skewed null data.

use hdnr::sim::{empirical_size, IcmSpec, Innovation, Mixing, SizeProcedure, SizeSource, SizeStudyConfig};
use hdnr::TwoSampleTest;

pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = IcmSpec::centered(80, Mixing::Ar1 { rho: 0.7 }, Innovation::Exponential);
    let source = SizeSource::Generator { spec, n1: 15, n2: 20 };
    let tests = [TwoSampleTest::Bs1996, TwoSampleTest::Cq2010, TwoSampleTest::Zgzc2020, TwoSampleTest::Zz2022Tsbf];
    let procs: Vec<&dyn SizeProcedure> = tests.iter().map(|t| t as &dyn SizeProcedure).collect();
    let cfg = SizeStudyConfig {
        nrep: 300,
        seed: 2024,
        ..SizeStudyConfig::default()
    };
    let table = empirical_size(&source, &procs, &cfg)?;
    print!("{table}");
    Ok(())
}
