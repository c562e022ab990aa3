//! Simulation harness: Monte Carlo mixture oracle, independent-component data
//! generator, empirical-size studies and estimator-bias audits.
//!
//! Every replicate draws from its own ChaCha12 stream derived from
//! `(seed, replicate)`, so results do not depend on the thread count.

mod audit;
mod icm;
mod oracle;
mod size;

pub use audit::{estimator_bias_audit, AuditEntry, AuditReport};
pub use icm::{icm_generate, icm_generate_with, IcmSpec, Innovation, Mixing};
pub use oracle::{mixture_mc_draws, mixture_mc_tail, McTail};
pub use size::{
    empirical_size, SizeProcedure, SizeRow, SizeSource, SizeStudyConfig, SizeTable,
};

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};

/// Name of the generator behind [`replicate_rng`].
pub const RNG_NAME: &str = "ChaCha12";

/// The RNG for replicate `stream` of a study seeded with `seed`.
pub fn replicate_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Runs `f` on a dedicated pool with `threads` workers (all cores if `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(Error::InvalidArgument("thread count must be at least 1".into()));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot build thread pool: {e}")))?;
    Ok(pool.install(f))
}
