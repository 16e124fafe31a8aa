//! Operation-count model for erasure decoding of Reed-Solomon style MDS
//! codes with Berlekamp-Massey, plus the MDS decodability predicate.

use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::model::Rate;

/// Additions and multiplications of a split-radix FFT of length `2^eta`.
pub fn fft_ops(eta: u32) -> Result<(u64, u64)> {
    if eta < 1 {
        return Err(Error::OutOfRange("fft length exponent must be at least 1".into()));
    }
    let half = 1i128 << (eta - 1);
    let eta = eta as i128;
    let adds = half * (3 * eta - 5) + 4;
    let mults = half * (eta - 3) + 2;
    Ok((adds as u64, mults as u64))
}

/// `ceil(log2 n)` for `n >= 1`.
pub fn ceil_log2(n: u64) -> u32 {
    assert!(n >= 1);
    u64::BITS - (n - 1).leading_zeros()
}

/// Decoding operation counts `(N_a, N_m)` for a length-`k/Ro` code with a
/// fraction `erased` of its symbols missing.
pub fn bm_ops(k: u64, outer: Rate, erased: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&erased) {
        return Err(Error::OutOfRange(format!("erasure fraction {erased} not in [0, 1]")));
    }
    let n1 = Rate::from_integer(k) / outer;
    if !n1.is_integer() || n1.to_integer() == 0 {
        return Err(Error::NonIntegralShape(format!("k/Ro = {n1} is not a positive integer")));
    }
    let n1 = n1.to_integer();
    let (fa, fm) = fft_ops(ceil_log2(n1).max(1))?;
    let n1f = n1.to_f64().unwrap_or(f64::INFINITY);
    let quad = n1f * n1f * erased;
    Ok((fa as f64 + quad - n1f, fm as f64 + quad))
}

/// Any `k` distinct products of an MDS code suffice.
pub fn mds_decodable(distinct: usize, k: usize) -> bool {
    distinct >= k
}

/// Whether a binary `[n1, k]` MDS code exists: only the trivial,
/// single-parity-check and repetition codes qualify.
pub fn binary_mds_exists(k: u64, n1: u64) -> bool {
    k <= 1 || n1 <= k + 1
}
