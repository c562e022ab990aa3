//! Monte Carlo bias of plug-in and corrected trace estimators.

use hdnr::sim::{estimator_bias_audit, IcmSpec, Innovation, Mixing};

pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = IcmSpec::centered(20, Mixing::CompoundSymmetry { rho: 0.4 }, Innovation::Normal);
    for n in [10, 30] {
        let audit = estimator_bias_audit(&spec, n, 2000, 17)?;
        println!("n = {n}, p = {}, {} replicates", audit.p, audit.nrep);
        for e in &audit.entries {
            println!(
                "  {:<8} truth {:>10.3}  corrected {:>+8.3}%  plug-in {:>+8.3}%",
                e.name,
                e.truth,
                100.0 * e.rel_bias,
                100.0 * e.plugin_rel_bias
            );
        }
    }
    Ok(())
}
