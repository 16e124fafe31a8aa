//! Assignment matrices (per-node queue orders) and enumeration of feasible
//! rate pairs.

use std::fmt::Write as _;

use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::model::{binomial, Rate, Rates, Scheme, SystemParams};

/// Queue-order matrix: entry `(i, j)` is the 1-based index of the `i`-th
/// coded row in the queue of node `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssignmentMatrix {
    rows: Vec<Vec<usize>>,
    e: usize,
    n1: usize,
}

impl AssignmentMatrix {
    fn from_columns(cols: Vec<Vec<usize>>, n1: usize) -> Self {
        let e = cols.len();
        let depth = cols.first().map_or(0, Vec::len);
        let rows = (0..depth).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
        Self { rows, e, n1 }
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.e
    }

    /// Number of distinct coded rows `k/Ro`.
    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn get(&self, row: usize, node: usize) -> usize {
        self.rows[row][node]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    /// The queue of `node`, in processing order.
    pub fn queue(&self, node: usize) -> Vec<usize> {
        self.rows.iter().map(|r| r[node]).collect()
    }

    /// How many times each coded row (index `1..=n1`, slot 0 unused) is stored.
    pub fn multiplicities(&self) -> Vec<usize> {
        let mut mult = vec![0; self.n1 + 1];
        for row in &self.rows {
            for &x in row {
                mult[x] += 1;
            }
        }
        mult
    }

    /// One line per queue position, one comma-separated column per node.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(usize::to_string).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }
}

fn shape(k: usize, rates: &Rates) -> Result<(usize, usize)> {
    let k = k as u64;
    let n1 = rates
        .distinct_rows(k)
        .ok_or_else(|| Error::NonIntegralShape(format!("k/Ro = {k}/{} is not an integer", rates.outer)))?;
    let n = rates
        .total_rows(k)
        .ok_or_else(|| Error::NonIntegralShape("k/(Ro Ri) is not an integer".into()))?;
    Ok((n1 as usize, n as usize))
}

/// Row-major block `A1` of `1..=k/Ro`, followed by left cyclic shifts of it
/// until `k/(Ro Ri)` entries are placed; the last block may be partial.
pub fn cyclic_assignment(k: usize, e: usize, rates: &Rates) -> Result<AssignmentMatrix> {
    let (n1, n) = shape(k, rates)?;
    if e == 0 || n1 % e != 0 || n % e != 0 {
        return Err(Error::NonIntegralShape(format!(
            "k/(e Ro) = {n1}/{e} and k/(e Ro Ri) = {n}/{e} must be integers"
        )));
    }
    let inv = rates.replication.recip();
    if inv > Rate::from_integer(e as u64) {
        return Err(Error::InvalidDesign(format!("1/Ri = {inv} exceeds e = {e}")));
    }
    let m = n1 / e;
    // Rows of the trailing partial block, from the rational expression directly.
    let partial = (Rate::from_integer(1) + inv - Rate::from_integer(inv.ceil().to_integer()))
        * Rate::from_integer(m as u64);
    let partial = if inv.is_integer() { Rate::from_integer(0) } else { partial };
    if !partial.is_integer() {
        return Err(Error::NonIntegralShape(format!("partial block of {partial} rows")));
    }
    let depth = n / e;
    debug_assert_eq!(depth, inv.floor().to_integer() as usize * m + partial.to_integer() as usize);
    let cols = (0..e)
        .map(|j| {
            (0..depth)
                .map(|t| {
                    let (block, r) = t.div_rem(&m);
                    r * e + (j + block) % e + 1
                })
                .collect()
        })
        .collect();
    Ok(AssignmentMatrix::from_columns(cols, n1))
}

/// Lexicographic `size`-subsets of `0..e`.
pub fn subsets(e: usize, size: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, e: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for x in start..e {
            if e - x < size - cur.len() {
                break;
            }
            cur.push(x);
            rec(x + 1, e, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, e, size, &mut Vec::with_capacity(size), &mut out);
    out
}

/// Splits `k/Ro` rows into `C(e, 1/Ri)` consecutive batches and gives batch
/// `b` to the `b`-th lexicographic `(1/Ri)`-subset of nodes.
pub fn batch_assignment(k: usize, e: usize, rates: &Rates) -> Result<AssignmentMatrix> {
    let (n1, _) = shape(k, rates)?;
    let rep = rates
        .replication_factor()
        .ok_or_else(|| Error::NonIntegralShape(format!("1/Ri = {} is not an integer", rates.replication.recip())))?
        as usize;
    if rep > e {
        return Err(Error::InvalidDesign(format!("1/Ri = {rep} exceeds e = {e}")));
    }
    let sets = subsets(e, rep);
    if n1 % sets.len() != 0 {
        return Err(Error::NonIntegralShape(format!(
            "C({e}, {rep}) = {} does not divide k/Ro = {n1}",
            sets.len()
        )));
    }
    let size = n1 / sets.len();
    let mut cols = vec![Vec::new(); e];
    for (b, set) in sets.iter().enumerate() {
        for &j in set {
            cols[j].extend(b * size + 1..=(b + 1) * size);
        }
    }
    Ok(AssignmentMatrix::from_columns(cols, n1))
}

/// Rate pairs admissible for `scheme`, with `k/Ro` and `k/(Ro Ri)` restricted
/// to multiples of `step` (`step = 1` enumerates everything).
pub fn feasible_designs_on_grid(
    params: &SystemParams,
    scheme: Scheme,
    phi_prime: usize,
    step: usize,
) -> impl Iterator<Item = Rates> {
    let k = params.k as u64;
    let e = params.e as u64;
    let cap = params.max_total_rows();
    let step = step.max(1) as u64;
    let storage_ok = params.validate().is_ok();
    let min_distinct = match scheme {
        Scheme::RatelessIr => k + phi_prime as u64,
        Scheme::MdsIr | Scheme::MdsR => k,
    };
    let on_grid = move |x: u64| x == k || x % step == 0;
    (k..=if storage_ok { cap } else { 0 })
        .filter(move |&n1| on_grid(n1) && (n1 == k || n1 >= min_distinct))
        .flat_map(move |n1| -> Box<dyn Iterator<Item = Rates>> {
            match scheme {
                Scheme::RatelessIr | Scheme::MdsIr => {
                    if n1 % e != 0 {
                        return Box::new(std::iter::empty());
                    }
                    Box::new(
                        (n1..=cap)
                            .filter(move |&n| n % e == 0 && on_grid(n))
                            .map(move |n| Rates::from_counts(k, n1, n).expect("ordered counts")),
                    )
                }
                Scheme::MdsR => Box::new((1..=e).filter_map(move |rep| {
                    let n = n1 * rep;
                    (n <= cap && n1 % binomial(e, rep) == 0)
                        .then(|| Rates::from_counts(k, n1, n).expect("ordered counts"))
                })),
            }
        })
}

/// Every rate pair admissible for `scheme`.
pub fn feasible_designs(params: &SystemParams, scheme: Scheme, phi_prime: usize) -> impl Iterator<Item = Rates> {
    feasible_designs_on_grid(params, scheme, phi_prime, 1)
}

/// `k / (e Ro Ri)` as a float, for reporting.
pub fn rows_per_node(k: usize, e: usize, rates: &Rates) -> f64 {
    (Rate::from_integer(k as u64) / (rates.outer * rates.replication * Rate::from_integer(e as u64)))
        .to_f64()
        .unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn rates(o: (u64, u64), i: (u64, u64)) -> Rates {
        Rates::new(Rate::new(o.0, o.1), Rate::new(i.0, i.1)).unwrap()
    }

    #[test]
    fn cyclic_small_cases() {
        let a = cyclic_assignment(2, 2, &rates((1, 1), (1, 1))).unwrap();
        assert_eq!(a.rows(), &[vec![1, 2]]);
        let a = cyclic_assignment(2, 2, &rates((1, 1), (1, 2))).unwrap();
        assert_eq!(a.rows(), &[vec![1, 2], vec![2, 1]]);
        assert!(cyclic_assignment(15, 4, &rates((3, 4), (2, 5))).is_err());
    }

    #[test]
    fn batch_small_case() {
        let a = batch_assignment(3, 3, &rates((1, 1), (1, 2))).unwrap();
        assert_eq!(a.queue(0), vec![1, 2]);
        assert_eq!(a.queue(1), vec![1, 3]);
        assert_eq!(a.queue(2), vec![2, 3]);
        assert!(batch_assignment(15, 5, &rates((15, 16), (1, 3))).is_err());
    }

    #[test]
    fn subsets_are_lexicographic() {
        let s = subsets(4, 2);
        assert_eq!(s, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(subsets(5, 3).len(), 10);
        assert_eq!(subsets(3, 0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn rateless_grid_contains_reported_optimum() {
        let p = SystemParams::reference(10_000);
        let target = rates((1, 3), (1, 1));
        assert!(feasible_designs(&p, Scheme::RatelessIr, 2000).any(|r| r == target));
        assert_eq!(rows_per_node(10_000, 5, &target), 6000.0);
        assert!(feasible_designs_on_grid(&p, Scheme::RatelessIr, 2000, 1000).any(|r| r == target));
    }

    #[test]
    fn uncoded_corner() {
        let p = SystemParams::reference(10_000);
        let uncoded = Rates::new(Rate::one(), Rate::one()).unwrap();
        for s in Scheme::ALL {
            assert!(feasible_designs_on_grid(&p, s, 2000, 1000).any(|r| r == uncoded));
        }
        let odd = SystemParams::reference(10_001);
        assert!(!feasible_designs_on_grid(&odd, Scheme::MdsIr, 0, 1000).any(|r| r == uncoded));
        let starved = SystemParams { mu: 0.1, ..p };
        assert_eq!(feasible_designs(&starved, Scheme::MdsIr, 0).count(), 0);
    }

    #[test]
    fn mds_ir_grid_contains_pure_replication() {
        let p = SystemParams::reference(10_000);
        assert!(feasible_designs_on_grid(&p, Scheme::MdsIr, 0, 1000).any(|r| r == rates((1, 1), (1, 3))));
    }

    #[test]
    fn mds_r_grid_respects_batches() {
        let p = SystemParams::reference(5000);
        let all: Vec<_> = feasible_designs(&p, Scheme::MdsR, 0).collect();
        assert!(all.contains(&Rates::from_counts(5000, 7150, 14_300).unwrap()));
        for r in &all {
            let rep = r.replication_factor().unwrap();
            assert_eq!(r.distinct_rows(5000).unwrap() % binomial(5, rep), 0);
            assert!(r.total_rows(5000).unwrap() <= p.max_total_rows());
        }
    }
}
