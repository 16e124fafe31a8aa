//! Binary LT codes: robust Soliton degrees, row sampling, inactivation
//! decoding with operation counts, and the ML failure-probability bound.

mod bound;
mod inactivation;
mod soliton;

pub use bound::{failure_bound, krawtchouk, FailureBound};
pub use inactivation::{inactivation_decode, inactivation_decode_with_schedule, DecodeCost, Schedule};
pub use soliton::{sample_row, sample_rows, DegreeDistribution, EncodingRow};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Average decode cost over independent received sets of `received` rows.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MeanDecodeCost {
    pub matrix_ops_add: f64,
    pub per_vector_ops_add: f64,
    pub success_rate: f64,
}

impl MeanDecodeCost {
    /// Additions to decode `vectors` right-hand sides.
    pub fn total_ops(&self, vectors: usize) -> f64 {
        self.matrix_ops_add + vectors as f64 * self.per_vector_ops_add
    }
}

/// Decodes `samples` random systems of `received` rows in parallel; sample
/// `t` uses stream `t` of a generator seeded with `seed`.
pub fn estimate_decode_cost(
    dist: &DegreeDistribution,
    k: usize,
    received: usize,
    samples: usize,
    seed: u64,
) -> MeanDecodeCost {
    let costs: Vec<DecodeCost> = (0..samples)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let rows = sample_rows(dist, k, received, &mut rng);
            inactivation_decode(&rows, k)
        })
        .collect();
    let n = samples.max(1) as f64;
    MeanDecodeCost {
        matrix_ops_add: costs.iter().map(|c| c.matrix_ops_add as f64).sum::<f64>() / n,
        per_vector_ops_add: costs.iter().map(|c| c.per_vector_ops_add as f64).sum::<f64>() / n,
        success_rate: costs.iter().filter(|c| c.success).count() as f64 / n,
    }
}

/// Number of extra rows beyond `k` a fresh random stream needed before the
/// system first became decodable, or `None` if `k + max_extra` rows were not
/// enough. Decodability is monotone in the row count, so a bisection over
/// prefixes finds it.
pub fn first_decodable_overhead<R: Rng + ?Sized>(
    dist: &DegreeDistribution,
    k: usize,
    max_extra: usize,
    rng: &mut R,
) -> Option<usize> {
    let rows = sample_rows(dist, k, k + max_extra, rng);
    if !inactivation_decode(&rows, k).success {
        return None;
    }
    let (mut lo, mut hi) = (0, max_extra);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if inactivation_decode(&rows[..k + mid], k).success {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Some(lo)
}
