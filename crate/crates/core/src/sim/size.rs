use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{icm_generate_with, replicate_rng, with_threads, IcmSpec, RNG_NAME};
use crate::error::{Error, Result};
use crate::matrix::{compensated_sum, DataMatrix};
use crate::report::format_value;
use crate::two_sample::{TwoSampleInput, TwoSampleTest};

/// A two-sample procedure under study: a p-value plus named parameters to be
/// averaged over replicates.
pub trait SizeProcedure: Sync {
    fn name(&self) -> String;
    fn run(&self, y1: &DataMatrix, y2: &DataMatrix) -> Result<(f64, Vec<(String, f64)>)>;
}

impl SizeProcedure for TwoSampleTest {
    fn name(&self) -> String {
        self.id().to_string()
    }

    fn run(&self, y1: &DataMatrix, y2: &DataMatrix) -> Result<(f64, Vec<(String, f64)>)> {
        let r = TwoSampleTest::run(*self, &TwoSampleInput::new(y1, y2)?)?;
        Ok((r.p_value, r.parameters))
    }
}

/// Where null replicates come from.
#[derive(Debug, Clone)]
pub enum SizeSource<'a> {
    /// Random splits of one pooled sample: `n1` rows drawn without
    /// replacement form group 1, the rest group 2.
    Split { data: &'a DataMatrix, n1: usize },
    /// Two fresh samples from the same model.
    Generator { spec: IcmSpec, n1: usize, n2: usize },
}

impl SizeSource<'_> {
    fn validate(&self) -> Result<()> {
        match self {
            SizeSource::Split { data, n1 } => {
                if *n1 < 2 || data.nrows() < n1 + 2 {
                    return Err(Error::InvalidArgument(format!(
                        "cannot split {} rows into groups of {} and {}",
                        data.nrows(),
                        n1,
                        data.nrows().saturating_sub(*n1)
                    )));
                }
            }
            SizeSource::Generator { spec, n1, n2 } => {
                spec.validate()?;
                if *n1 < 2 || *n2 < 2 {
                    return Err(Error::TooFewObservations {
                        required: 2,
                        actual: (*n1).min(*n2),
                    });
                }
            }
        }
        Ok(())
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> Result<(DataMatrix, DataMatrix)> {
        match self {
            SizeSource::Split { data, n1 } => {
                let n = data.nrows();
                let mut first = rand::seq::index::sample(rng, n, *n1).into_vec();
                first.sort_unstable();
                let mut in_first = vec![false; n];
                for &i in &first {
                    in_first[i] = true;
                }
                let rest: Vec<usize> = (0..n).filter(|&i| !in_first[i]).collect();
                Ok((data.select_rows(&first), data.select_rows(&rest)))
            }
            SizeSource::Generator { spec, n1, n2 } => {
                let y1 = icm_generate_with(spec, *n1, rng)?;
                let y2 = icm_generate_with(spec, *n2, rng)?;
                Ok((y1, y2))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeStudyConfig {
    pub nrep: usize,
    pub alphas: Vec<f64>,
    pub seed: u64,
    /// Worker threads; `None` uses every core.
    pub threads: Option<usize>,
}

impl Default for SizeStudyConfig {
    fn default() -> Self {
        Self {
            nrep: 1000,
            alphas: vec![0.10, 0.05, 0.01],
            seed: 1,
            threads: None,
        }
    }
}

impl SizeStudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nrep == 0 {
            return Err(Error::InvalidArgument("nrep must be at least 1".into()));
        }
        if self.alphas.is_empty() || self.alphas.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
            return Err(Error::InvalidArgument(format!(
                "alpha levels must lie in (0, 1), got {:?}",
                self.alphas
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeRow {
    pub test: String,
    /// Rejection counts, one per alpha level.
    pub rejections: Vec<u64>,
    /// Rejection proportions, one per alpha level.
    pub sizes: Vec<f64>,
    /// Replicates on which the test returned an error (counted as
    /// non-rejections).
    pub failures: u64,
    /// Approximation parameters averaged over successful replicates.
    pub mean_parameters: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeTable {
    pub nrep: usize,
    pub alphas: Vec<f64>,
    pub seed: u64,
    pub rng: String,
    pub rows: Vec<SizeRow>,
}

impl SizeTable {
    pub fn row(&self, test: &str) -> Option<&SizeRow> {
        self.rows.iter().find(|r| r.test == test)
    }
}

impl fmt::Display for SizeTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "Empirical sizes (%) over {} replicates, seed {} ({})",
            self.nrep, self.seed, self.rng
        )?;
        let w = self.rows.iter().map(|r| r.test.len()).max().unwrap_or(4).max(4);
        write!(f, "{:<w$}", "test")?;
        for a in &self.alphas {
            write!(f, " {:>8}", format!("a={}", a))?;
        }
        writeln!(f, " {:>8}  parameters", "failed")?;
        for r in &self.rows {
            write!(f, "{:<w$}", r.test)?;
            for s in &r.sizes {
                write!(f, " {:>8.2}", 100.0 * s)?;
            }
            write!(f, " {:>8}", r.failures)?;
            let params: Vec<String> = r
                .mean_parameters
                .iter()
                .map(|(k, v)| format!("{k}={}", format_value(*v)))
                .collect();
            writeln!(f, "  {}", params.join(" "))?;
        }
        Ok(())
    }
}

type Outcome = Option<(f64, Vec<(String, f64)>)>;

/// Rejection rates at each alpha for every procedure over `cfg.nrep` null
/// replicates. Counts are identical for any thread count.
pub fn empirical_size(
    source: &SizeSource,
    procedures: &[&dyn SizeProcedure],
    cfg: &SizeStudyConfig,
) -> Result<SizeTable> {
    cfg.validate()?;
    source.validate()?;
    if procedures.is_empty() {
        return Err(Error::InvalidArgument("no tests selected".into()));
    }
    let outcomes: Vec<Vec<Outcome>> = with_threads(cfg.threads, || {
        (0..cfg.nrep)
            .into_par_iter()
            .map(|r| {
                let mut rng = replicate_rng(cfg.seed, r as u64);
                match source.draw(&mut rng) {
                    Ok((y1, y2)) => procedures.iter().map(|p| p.run(&y1, &y2).ok()).collect(),
                    Err(_) => vec![None; procedures.len()],
                }
            })
            .collect()
    })?;

    let rows = procedures
        .iter()
        .enumerate()
        .map(|(t, proc_)| {
            let mut rejections = vec![0u64; cfg.alphas.len()];
            let mut failures = 0;
            let mut names: Vec<String> = Vec::new();
            let mut values: Vec<Vec<f64>> = Vec::new();
            for rep in &outcomes {
                match &rep[t] {
                    Some((pv, params)) => {
                        for (a, count) in cfg.alphas.iter().zip(rejections.iter_mut()) {
                            if pv < a {
                                *count += 1;
                            }
                        }
                        for (k, v) in params {
                            let idx = match names.iter().position(|n| n == k) {
                                Some(i) => i,
                                None => {
                                    names.push(k.clone());
                                    values.push(Vec::new());
                                    names.len() - 1
                                }
                            };
                            values[idx].push(*v);
                        }
                    }
                    None => failures += 1,
                }
            }
            let mean_parameters = names
                .into_iter()
                .zip(values)
                .map(|(k, v)| {
                    let n = v.len() as f64;
                    (k, compensated_sum(v) / n)
                })
                .collect();
            SizeRow {
                test: proc_.name(),
                sizes: rejections.iter().map(|&c| c as f64 / cfg.nrep as f64).collect(),
                rejections,
                failures,
                mean_parameters,
            }
        })
        .collect();
    Ok(SizeTable {
        nrep: cfg.nrep,
        alphas: cfg.alphas.clone(),
        seed: cfg.seed,
        rng: RNG_NAME.to_string(),
        rows,
    })
}
