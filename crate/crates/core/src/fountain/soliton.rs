use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};

/// Probability mass over degrees `1..=k`.
#[derive(Clone, Debug, PartialEq)]
pub struct DegreeDistribution {
    omega: Vec<f64>,
    cdf: Vec<f64>,
}

impl DegreeDistribution {
    /// `omega[d - 1]` is the probability of degree `d`.
    pub fn new(omega: Vec<f64>) -> Result<Self> {
        if omega.is_empty() {
            return Err(Error::InvalidParams("degree distribution needs at least one degree".into()));
        }
        if omega.iter().any(|&w| !(w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidParams("degree probabilities must be finite and nonnegative".into()));
        }
        let total: f64 = omega.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams(format!("degree probabilities sum to {total}")));
        }
        let mut cdf = Vec::with_capacity(omega.len());
        let mut acc = 0.0;
        for &w in &omega {
            acc += w;
            cdf.push(acc);
        }
        Ok(Self { omega, cdf })
    }

    pub fn point_mass(k: usize, d: usize) -> Result<Self> {
        if d == 0 || d > k {
            return Err(Error::InvalidParams(format!("degree {d} outside [1, {k}]")));
        }
        let mut omega = vec![0.0; k];
        omega[d - 1] = 1.0;
        Self::new(omega)
    }

    /// Ideal Soliton plus the robust correction with its spike at `gamma`.
    pub fn robust_soliton(k: usize, gamma: usize, zeta: f64) -> Result<Self> {
        if gamma < 1 || gamma > k {
            return Err(Error::InvalidParams(format!("spike gamma = {gamma} outside [1, {k}]")));
        }
        if !(zeta > 0.0 && zeta < 1.0) {
            return Err(Error::InvalidParams(format!("zeta = {zeta} outside (0, 1)")));
        }
        let kf = k as f64;
        let g = gamma as f64;
        let mut omega = vec![0.0; k];
        omega[0] = 1.0 / kf;
        for d in 2..=k {
            omega[d - 1] = 1.0 / (d as f64 * (d as f64 - 1.0));
        }
        for d in 1..gamma {
            omega[d - 1] += 1.0 / (d as f64 * g);
        }
        omega[gamma - 1] += (kf / (g * zeta)).ln() / g;
        let total: f64 = omega.iter().sum();
        omega.iter_mut().for_each(|w| *w /= total);
        Self::new(omega)
    }

    /// Largest degree with support.
    pub fn k(&self) -> usize {
        self.omega.len()
    }

    pub fn pmf(&self, d: usize) -> f64 {
        if d == 0 {
            0.0
        } else {
            self.omega.get(d - 1).copied().unwrap_or(0.0)
        }
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn mean(&self) -> f64 {
        self.omega.iter().enumerate().map(|(i, w)| (i + 1) as f64 * w).sum()
    }

    pub fn sample_degree<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let x: f64 = rng.random::<f64>() * self.cdf[self.cdf.len() - 1];
        let d = self.cdf.partition_point(|&c| c <= x);
        d.min(self.omega.len() - 1) + 1
    }
}

/// One LT-coded row: the sorted, distinct, 0-based source indices it sums.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodingRow {
    pub neighbors: Vec<usize>,
}

impl EncodingRow {
    pub fn new(mut neighbors: Vec<usize>) -> Self {
        neighbors.sort_unstable();
        neighbors.dedup();
        Self { neighbors }
    }

    pub fn degree(&self) -> usize {
        self.neighbors.len()
    }
}

/// Draws a degree from `dist`, then that many distinct indices from `0..k`.
pub fn sample_row<R: Rng + ?Sized>(dist: &DegreeDistribution, k: usize, rng: &mut R) -> EncodingRow {
    let d = dist.sample_degree(rng).min(k);
    EncodingRow::new(index::sample(rng, k, d).into_vec())
}

/// `count` independent rows.
pub fn sample_rows<R: Rng + ?Sized>(dist: &DegreeDistribution, k: usize, count: usize, rng: &mut R) -> Vec<EncodingRow> {
    (0..count).map(|_| sample_row(dist, k, rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn robust_soliton_normalizes() {
        for (k, g, z) in [(1, 1, 0.5), (20, 5, 0.1), (100, 10, 0.1), (10_000, 210, 1e-4)] {
            let d = DegreeDistribution::robust_soliton(k, g, z).unwrap();
            assert!((d.omega().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert_eq!(d.k(), k);
        }
        assert_eq!(DegreeDistribution::robust_soliton(1, 1, 0.3).unwrap().pmf(1), 1.0);
    }

    #[test]
    fn robust_soliton_spikes_at_gamma() {
        let d = DegreeDistribution::robust_soliton(100, 10, 0.1).unwrap();
        assert!(d.pmf(10) > d.pmf(9) && d.pmf(10) > d.pmf(11));
        // Unnormalized masses, recomputed term by term.
        let raw = |x: usize| -> f64 {
            let x = x as f64;
            let rho = if x == 1.0 { 0.01 } else { 1.0 / (x * (x - 1.0)) };
            let tau = if x < 10.0 { 1.0 / (x * 10.0) } else if x == 10.0 { (100.0f64 / (10.0 * 0.1)).ln() / 10.0 } else { 0.0 };
            rho + tau
        };
        let z: f64 = (1..=100).map(raw).sum();
        for x in [1, 2, 9, 10, 11, 100] {
            assert!((d.pmf(x) - raw(x) / z).abs() < 1e-15);
        }
    }

    #[test]
    fn robust_soliton_rejects_bad_spike() {
        assert!(DegreeDistribution::robust_soliton(10, 0, 0.1).is_err());
        assert!(DegreeDistribution::robust_soliton(10, 11, 0.1).is_err());
        assert!(DegreeDistribution::robust_soliton(10, 5, 1.0).is_err());
    }

    #[test]
    fn full_degree_rows() {
        let d = DegreeDistribution::point_mass(7, 7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            assert_eq!(sample_row(&d, 7, &mut rng).neighbors, (0..7).collect::<Vec<_>>());
        }
    }

    #[test]
    fn singleton_rows_are_uniform() {
        let k = 20;
        let d = DegreeDistribution::point_mass(k, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut counts = vec![0u64; k];
        let n = 100_000;
        for _ in 0..n {
            let row = sample_row(&d, k, &mut rng);
            assert_eq!(row.degree(), 1);
            counts[row.neighbors[0]] += 1;
        }
        let expected = n as f64 / k as f64;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 0.999 quantile of chi-square with 19 degrees of freedom.
        assert!(chi2 < 43.82, "chi2 = {chi2}");
    }

    #[test]
    fn sampling_is_deterministic() {
        let d = DegreeDistribution::robust_soliton(50, 5, 0.1).unwrap();
        let a = sample_rows(&d, 50, 30, &mut ChaCha8Rng::seed_from_u64(9));
        let b = sample_rows(&d, 50, 30, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn empirical_degrees_follow_pmf() {
        let d = DegreeDistribution::robust_soliton(30, 8, 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 200_000;
        let mut hist = vec![0u64; 31];
        for _ in 0..n {
            hist[d.sample_degree(&mut rng)] += 1;
        }
        for x in [1, 2, 3, 8] {
            let p = d.pmf(x);
            let sd = (p * (1.0 - p) / n as f64).sqrt();
            assert!((hist[x] as f64 / n as f64 - p).abs() < 5.0 * sd);
        }
    }
}
