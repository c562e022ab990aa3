//! Trace functionals of a sample covariance without forming the p×p matrix,
//! and their bias-corrected versions.

use std::time::Instant;

use hdnr::estimators::TraceEstimates;
use hdnr::matrix::{center, tr_cov_sq_with, GramPath};
use hdnr::sim::{icm_generate, IcmSpec, Innovation, Mixing};

pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = IcmSpec::centered(2000, Mixing::Ar1 { rho: 0.5 }, Innovation::Normal);
    let x = icm_generate(&spec, 30, 3)?;
    let zc = center(&x)?;

    for path in [GramPath::Observation, GramPath::Variable] {
        let t0 = Instant::now();
        let v = tr_cov_sq_with(&zc, path);
        println!("tr(S^2) via {path:?}: {v:.6} in {:.3?}", t0.elapsed());
    }

    let est = TraceEstimates::from_factor(&zc)?;
    let sigma = spec.sigma();
    let truth2 = (&sigma * &sigma).trace();
    let truth3 = (&sigma * &sigma * &sigma).trace();
    println!("tr(Sigma^2): truth {truth2:.1}, plug-in {:.1}, corrected {:.1}", est.trs2_plugin, est.trs2_hat);
    println!("tr(Sigma^3): truth {truth3:.1}, plug-in {:.1}, corrected {:.1}", est.trs3_plugin, est.trs3_hat);
    println!("tr^2(Sigma): truth {:.1}, corrected {:.1}", sigma.trace().powi(2), est.tr2s_hat);
    Ok(())
}
