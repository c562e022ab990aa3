use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use super::{icm_generate_with, replicate_rng, IcmSpec, Innovation};
use crate::error::{Error, Result};
use crate::estimators::TraceEstimates;
use crate::matrix::{center, compensated_sum};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditEntry {
    pub name: String,
    pub truth: f64,
    /// Monte Carlo mean of the corrected estimator.
    pub mean: f64,
    pub rel_bias: f64,
    /// Monte Carlo mean of the plug-in counterpart.
    pub plugin_mean: f64,
    pub plugin_rel_bias: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub n: usize,
    pub p: usize,
    pub nrep: usize,
    pub entries: Vec<AuditEntry>,
}

impl AuditReport {
    pub fn entry(&self, name: &str) -> Option<&AuditEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn max_abs_rel_bias(&self) -> f64 {
        self.entries.iter().map(|e| e.rel_bias.abs()).fold(0.0, f64::max)
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Estimator bias over {} replicates (n = {}, p = {})", self.nrep, self.n, self.p)?;
        writeln!(
            f,
            "{:<10} {:>14} {:>14} {:>10} {:>14} {:>10}",
            "target", "truth", "mean", "bias %", "plug-in mean", "bias %"
        )?;
        for e in &self.entries {
            writeln!(
                f,
                "{:<10} {:>14.6} {:>14.6} {:>10.4} {:>14.6} {:>10.4}",
                e.name,
                e.truth,
                e.mean,
                100.0 * e.rel_bias,
                e.plugin_mean,
                100.0 * e.plugin_rel_bias
            )?;
        }
        Ok(())
    }
}

/// Relative Monte Carlo bias of the corrected `tr Σ²`, `tr² Σ` and `tr Σ³`
/// estimators (and of their plug-ins) under a normal model.
pub fn estimator_bias_audit(spec: &IcmSpec, n: usize, nrep: usize, seed: u64) -> Result<AuditReport> {
    spec.validate()?;
    if spec.innovation != Innovation::Normal {
        return Err(Error::InvalidArgument("the audit requires normal innovations".into()));
    }
    if nrep == 0 {
        return Err(Error::InvalidArgument("nrep must be at least 1".into()));
    }
    let sigma = spec.sigma();
    let s2 = &sigma * &sigma;
    let tr = sigma.trace();
    let truths = [s2.trace(), tr * tr, (&s2 * &sigma).trace()];

    let reps: Vec<[f64; 6]> = (0..nrep)
        .into_par_iter()
        .map(|r| -> Result<[f64; 6]> {
            let x = icm_generate_with(spec, n, &mut replicate_rng(seed, r as u64))?;
            let e = TraceEstimates::from_factor(&center(&x)?)?;
            Ok([
                e.trs2_hat,
                e.tr2s_hat,
                e.trs3_hat,
                e.trs2_plugin,
                e.trs * e.trs,
                e.trs3_plugin,
            ])
        })
        .collect::<Result<_>>()?;
    let mean = |k: usize| compensated_sum(reps.iter().map(|r| r[k])) / nrep as f64;
    let names = ["tr(S^2)", "tr^2(S)", "tr(S^3)"];
    let entries = (0..3)
        .map(|k| {
            let (m, pm) = (mean(k), mean(k + 3));
            AuditEntry {
                name: names[k].to_string(),
                truth: truths[k],
                mean: m,
                rel_bias: m / truths[k] - 1.0,
                plugin_mean: pm,
                plugin_rel_bias: pm / truths[k] - 1.0,
            }
        })
        .collect();
    Ok(AuditReport {
        n,
        p: spec.p(),
        nrep,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Mixing;

    #[test]
    fn small_audit() {
        let spec = IcmSpec::centered(10, Mixing::Ar1 { rho: 0.3 }, Innovation::Normal);
        let r = estimator_bias_audit(&spec, 30, 2000, 4).unwrap();
        assert!(r.max_abs_rel_bias() < 0.03, "{r}");
        let e = r.entry("tr(S^2)").unwrap();
        assert!(e.plugin_rel_bias > e.rel_bias.abs());
    }

    #[test]
    fn rejects_non_normal() {
        let spec = IcmSpec::centered(3, Mixing::Identity, Innovation::Exponential);
        assert!(estimator_bias_audit(&spec, 10, 10, 0).is_err());
    }
}
