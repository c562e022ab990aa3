use rand_distr::{ChiSquared, Distribution};
use rayon::prelude::*;

use super::replicate_rng;
use crate::chi2mix::ChiSquareMixture;
use crate::error::{Error, Result};

const CHUNK: usize = 1 << 16;
const MIN_DRAWS: usize = 10_000;

/// Monte Carlo tail probability with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McTail {
    pub p: f64,
    pub se: f64,
    pub draws: usize,
}

/// `draws` iid realizations of `Σ c_r χ²_{d_r}`, in a thread-count
/// independent order.
pub fn mixture_mc_draws(mix: &ChiSquareMixture, draws: usize, seed: u64) -> Result<Vec<f64>> {
    let laws = mix
        .dfs()
        .iter()
        .map(|&d| ChiSquared::new(d as f64).map_err(|e| Error::Domain(e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    let coeffs = mix.coeffs();
    let chunks = draws.div_ceil(CHUNK);
    let parts: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = replicate_rng(seed, c as u64);
            let len = CHUNK.min(draws - c * CHUNK);
            (0..len)
                .map(|_| {
                    coeffs
                        .iter()
                        .zip(&laws)
                        .map(|(w, law)| w * law.sample(&mut rng))
                        .sum()
                })
                .collect()
        })
        .collect();
    Ok(parts.concat())
}

/// Empirical `P(T ≥ t)` from `draws` mixture realizations.
pub fn mixture_mc_tail(mix: &ChiSquareMixture, t: f64, draws: usize, seed: u64) -> Result<McTail> {
    if draws < MIN_DRAWS {
        return Err(Error::InvalidArgument(format!(
            "at least {MIN_DRAWS} draws required, got {draws}"
        )));
    }
    let hits = mixture_mc_draws(mix, draws, seed)?
        .iter()
        .filter(|&&x| x >= t)
        .count();
    let p = hits as f64 / draws as f64;
    Ok(McTail {
        p,
        se: (p * (1.0 - p) / draws as f64).sqrt(),
        draws,
    })
}
