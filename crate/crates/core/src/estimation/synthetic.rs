use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::hom::HomTrace;

/// Poisson-distributed coincidence counts with mean `pairs_per_bin`·P_c(τ).
/// Deterministic for a given seed.
pub fn simulate_counts(trace: &HomTrace, pairs_per_bin: f64, seed: u64) -> Result<Vec<f64>> {
    poisson_counts(&trace.coincidence, pairs_per_bin, seed)
}

/// Same as [`simulate_counts`] on raw probabilities.
pub fn poisson_counts(probabilities: &[f64], pairs_per_bin: f64, seed: u64) -> Result<Vec<f64>> {
    if !(pairs_per_bin.is_finite() && pairs_per_bin > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "pairs per bin must be positive, got {pairs_per_bin}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    probabilities
        .iter()
        .map(|&p| {
            let mean = pairs_per_bin * p;
            if mean <= 0.0 {
                return Ok(0.0);
            }
            let law = Poisson::new(mean)
                .map_err(|e| Error::InvalidArgument(format!("poisson mean {mean}: {e}")))?;
            Ok(law.sample(&mut rng))
        })
        .collect()
}
