//! One realization of the computation phase: straggling times, per-node
//! progress, the stopping rule, spatial diversities and the discard rule.

use num_traits::ToPrimitive;
use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::error::{Error, Result};
use crate::model::{Rates, SchemeDesign};
use crate::placement::{subsets, AssignmentMatrix};

/// Initial busy periods of the edge nodes, in seconds.
#[derive(Clone, Debug, PartialEq)]
pub struct StragglerDraw {
    pub lambdas: Vec<f64>,
}

impl StragglerDraw {
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.iter().any(|&l| !(l >= 0.0 && l.is_finite())) {
            return Err(Error::InvalidParams("straggling times must be finite and nonnegative".into()));
        }
        Ok(Self { lambdas })
    }
}

/// `e` i.i.d. exponential straggling times with mean `beta`.
pub fn draw_stragglers<R: Rng + ?Sized>(beta: f64, e: usize, rng: &mut R) -> StragglerDraw {
    let exp = Exp::new(1.0 / beta).expect("positive straggling mean");
    StragglerDraw { lambdas: (0..e).map(|_| exp.sample(rng)).collect() }
}

/// Products finished by time `t` by a node that starts at `lambda`: the
/// number of instants `lambda + i * delta`, `1 <= i <= cap`, not after `t`.
#[inline]
pub fn completed(lambda: f64, t: f64, delta: f64, cap: usize) -> usize {
    if t <= lambda {
        return 0;
    }
    let mut i = (((t - lambda) / delta).floor().to_usize().unwrap_or(cap)).min(cap);
    while i < cap && lambda + (i + 1) as f64 * delta <= t {
        i += 1;
    }
    while i > 0 && lambda + i as f64 * delta > t {
        i -= 1;
    }
    i
}

/// `D_j(t) = min(floor((t - lambda_j)^+ / delta), rows_per_en)` for every node.
pub fn products_done(lambdas: &[f64], t: f64, delta: f64, rows_per_en: usize) -> Vec<usize> {
    lambdas.iter().map(|&l| completed(l, t, delta, rows_per_en)).collect()
}

/// Everything the latency model needs from one computation phase.
#[derive(Clone, Debug, PartialEq)]
pub struct ComputationOutcome {
    /// Computation latency `L_c`.
    pub lc: f64,
    /// Total products `P` that count towards the diversities.
    pub total_products: usize,
    /// `diversities[i]` is the spatial diversity of coded row `i + 1`.
    pub diversities: Vec<usize>,
    /// 0-based indices of the distinct products kept for decoding, ascending.
    pub retained: Vec<usize>,
    /// Nodes with `lambda_j < L_c`.
    pub active_nodes: usize,
}

impl ComputationOutcome {
    pub fn distinct_computed(&self) -> usize {
        self.diversities.iter().filter(|&&m| m > 0).count()
    }

    pub fn retained_diversities(&self) -> Vec<usize> {
        self.retained.iter().map(|&i| self.diversities[i]).collect()
    }

    /// `hist[m]` counts distinct rows of diversity `m`, for `m` in `0..=max`.
    pub fn diversity_histogram(&self, max: usize) -> Vec<usize> {
        let mut hist = vec![0; max + 1];
        for &m in &self.diversities {
            hist[m.min(max)] += 1;
        }
        hist
    }
}

fn design_k(assignment: &AssignmentMatrix, rates: &Rates) -> usize {
    let k = rates.outer * crate::model::Rate::from_integer(assignment.n1() as u64);
    k.to_integer() as usize
}

/// Runs the computation phase of `design` on `assignment` for one draw.
///
/// Irregular-repetition schemes stop at the first completion instant at which
/// both the distinct-product target and the total-product threshold are met;
/// MDS-R stops once `xi` nodes have emptied their queues, and only products
/// of those nodes are kept.
pub fn run_computation(
    assignment: &AssignmentMatrix,
    draw: &StragglerDraw,
    design: &SchemeDesign,
    delta: f64,
) -> Result<ComputationOutcome> {
    let e = assignment.num_nodes();
    if draw.lambdas.len() != e {
        return Err(Error::InvalidParams(format!("{} straggling times for {e} nodes", draw.lambdas.len())));
    }
    let rows = assignment.num_rows();
    let n1 = assignment.n1();
    let lambdas = &draw.lambdas;
    let k = design_k(assignment, &design.rates());

    let (lc, done): (f64, Vec<usize>) = match *design {
        SchemeDesign::MdsR { wait_for, .. } => {
            if wait_for == 0 || wait_for > e {
                return Err(Error::UnreachableStoppingSet(format!("cannot wait for {wait_for} of {e} nodes")));
            }
            let finish: Vec<f64> = lambdas.iter().map(|&l| l + rows as f64 * delta).collect();
            let mut order: Vec<usize> = (0..e).collect();
            order.sort_by(|&a, &b| finish[a].total_cmp(&finish[b]).then(a.cmp(&b)));
            let lc = finish[order[wait_for - 1]];
            let mut done = vec![0; e];
            for &j in &order[..wait_for] {
                done[j] = rows;
            }
            (lc, done)
        }
        SchemeDesign::RatelessIr { min_products, .. } | SchemeDesign::MdsIr { min_products, .. } => {
            let target = design.distinct_target(k).expect("irregular scheme");
            if target > n1 || min_products > rows * e {
                return Err(Error::UnreachableStoppingSet(format!(
                    "need {target} of {n1} distinct and {min_products} of {} total products",
                    rows * e
                )));
            }
            let mut first = vec![f64::INFINITY; n1];
            let mut events = Vec::with_capacity(rows * e);
            for (pos, row) in assignment.rows().iter().enumerate() {
                for (j, &idx) in row.iter().enumerate() {
                    let t = lambdas[j] + (pos + 1) as f64 * delta;
                    events.push(t);
                    if t < first[idx - 1] {
                        first[idx - 1] = t;
                    }
                }
            }
            let nth = |v: &mut Vec<f64>, n: usize| -> f64 {
                if n == 0 {
                    return 0.0;
                }
                *v.select_nth_unstable_by(n - 1, f64::total_cmp).1
            };
            let lc = nth(&mut first, target).max(nth(&mut events, min_products));
            (lc, products_done(lambdas, lc, delta, rows))
        }
    };

    let mut diversities = vec![0usize; n1];
    for (j, &d) in done.iter().enumerate() {
        for row in &assignment.rows()[..d] {
            diversities[row[j] - 1] += 1;
        }
    }
    let total_products = done.iter().sum();
    let active_nodes = lambdas.iter().filter(|&&l| l < lc).count();

    let mut retained: Vec<usize> = (0..n1).filter(|&i| diversities[i] > 0).collect();
    if let SchemeDesign::RatelessIr { .. } = design {
        let target = design.distinct_target(k).expect("irregular scheme");
        retained.sort_by_key(|&i| (std::cmp::Reverse(diversities[i]), i));
        retained.truncate(target);
        retained.sort_unstable();
    }
    Ok(ComputationOutcome { lc, total_products, diversities, retained, active_nodes })
}

/// Per-trial quantities the latency model consumes.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TrialSummary {
    pub lc: f64,
    pub total_products: usize,
    /// Distinct products computed (before the discard rule).
    pub distinct: usize,
    /// Distinct products kept for decoding.
    pub retained: usize,
    /// `sum 1/M_i` over the retained products.
    pub inv_diversity_sum: f64,
    pub active_nodes: usize,
}

impl TrialSummary {
    pub fn from_outcome(o: &ComputationOutcome) -> Self {
        Self {
            lc: o.lc,
            total_products: o.total_products,
            distinct: o.distinct_computed(),
            retained: o.retained.len(),
            inv_diversity_sum: o.retained.iter().map(|&i| 1.0 / o.diversities[i] as f64).sum(),
            active_nodes: o.active_nodes,
        }
    }
}

#[derive(Clone, Debug)]
enum Shape {
    Cyclic {
        /// Rows per full block, `k/(e Ro)`.
        m: usize,
        /// Rows in each block, the last possibly partial.
        block_rows: Vec<usize>,
        target: usize,
        min_products: usize,
        discard: bool,
    },
    Batch {
        wait_for: usize,
        /// Node sets of the batches.
        sets: Vec<Vec<usize>>,
        batch_size: usize,
    },
}

/// Evaluates the computation phase of a fixed design from the straggling
/// times alone, without materializing the assignment matrix.
///
/// For the cyclic construction, coded row `r e + c` (0-based) is stored in
/// block `b` by node `(c - b) mod e` at queue position `b m + r`, so the rows
/// of residue class `c` computed through block `b` are exactly the first
/// `T_{c,b} = clamp(D_{(c-b) mod e} - b m, 0, rows_b)` of that class.
#[derive(Clone, Debug)]
pub struct Evaluator {
    e: usize,
    rows: usize,
    delta: f64,
    shape: Shape,
}

impl Evaluator {
    pub fn new(k: usize, e: usize, design: &SchemeDesign, delta: f64) -> Result<Self> {
        let rates = design.rates();
        let n1 = rates
            .distinct_rows(k as u64)
            .ok_or_else(|| Error::NonIntegralShape("k/Ro is not an integer".into()))? as usize;
        let n = rates
            .total_rows(k as u64)
            .ok_or_else(|| Error::NonIntegralShape("k/(Ro Ri) is not an integer".into()))? as usize;
        if e == 0 || n % e != 0 {
            return Err(Error::NonIntegralShape(format!("k/(e Ro Ri) = {n}/{e} is not an integer")));
        }
        let rows = n / e;
        let shape = match *design {
            SchemeDesign::MdsR { wait_for, .. } => {
                let rep = rates
                    .replication_factor()
                    .ok_or_else(|| Error::NonIntegralShape("1/Ri is not an integer".into()))?
                    as usize;
                if rep > e || wait_for == 0 || wait_for > e {
                    return Err(Error::InvalidDesign(format!("1/Ri = {rep}, xi = {wait_for} with e = {e}")));
                }
                let sets = subsets(e, rep);
                if n1 % sets.len() != 0 {
                    return Err(Error::NonIntegralShape("C(e, 1/Ri) does not divide k/Ro".into()));
                }
                Shape::Batch { wait_for, batch_size: n1 / sets.len(), sets }
            }
            SchemeDesign::RatelessIr { min_products, .. } | SchemeDesign::MdsIr { min_products, .. } => {
                if n1 % e != 0 {
                    return Err(Error::NonIntegralShape(format!("k/(e Ro) = {n1}/{e} is not an integer")));
                }
                let m = n1 / e;
                if rows > e * m {
                    return Err(Error::InvalidDesign("replication factor exceeds e".into()));
                }
                let block_rows: Vec<usize> = (0..rows.div_ceil(m)).map(|b| m.min(rows - b * m)).collect();
                let target = design.distinct_target(k).expect("irregular scheme");
                if target > n1 || min_products > n {
                    return Err(Error::UnreachableStoppingSet(format!(
                        "need {target} of {n1} distinct and {min_products} of {n} total products"
                    )));
                }
                Shape::Cyclic {
                    m,
                    block_rows,
                    target,
                    min_products,
                    discard: matches!(design, SchemeDesign::RatelessIr { .. }),
                }
            }
        };
        Ok(Self { e, rows, delta, shape })
    }

    pub fn rows_per_node(&self) -> usize {
        self.rows
    }

    /// Sorted-descending thresholds of residue class `c` written into `buf`.
    fn class_thresholds(&self, done: &[usize], c: usize, m: usize, block_rows: &[usize], buf: &mut [usize]) {
        let e = self.e;
        for (b, &rb) in block_rows.iter().enumerate() {
            let node = (c + e - b % e) % e;
            buf[b] = done[node].saturating_sub(b * m).min(rb);
        }
        buf.sort_unstable_by(|a, b| b.cmp(a));
    }

    fn counts(&self, lambdas: &[f64], t: f64, done: &mut [usize]) -> (usize, usize) {
        let Shape::Cyclic { m, ref block_rows, .. } = self.shape else { unreachable!() };
        let mut total = 0;
        for (d, &l) in done.iter_mut().zip(lambdas) {
            *d = completed(l, t, self.delta, self.rows);
            total += *d;
        }
        let e = self.e;
        let mut distinct = 0;
        for c in 0..e {
            let mut best = 0;
            for (b, &rb) in block_rows.iter().enumerate() {
                let node = (c + e - b % e) % e;
                best = best.max(done[node].saturating_sub(b * m).min(rb));
            }
            distinct += best;
        }
        (distinct, total)
    }

    pub fn evaluate(&self, lambdas: &[f64]) -> TrialSummary {
        debug_assert_eq!(lambdas.len(), self.e);
        match &self.shape {
            Shape::Batch { wait_for, sets, batch_size } => self.evaluate_batch(lambdas, *wait_for, sets, *batch_size),
            Shape::Cyclic { min_products, .. } => self.evaluate_thresholds(lambdas, &[*min_products])[0],
        }
    }

    /// Outcomes of the same design with the total-product threshold replaced
    /// by each entry of `ps` in turn (irregular schemes only).
    pub fn evaluate_thresholds(&self, lambdas: &[f64], ps: &[usize]) -> Vec<TrialSummary> {
        let Shape::Cyclic { target, .. } = self.shape else {
            panic!("thresholds apply to the irregular schemes only");
        };
        let mut done = vec![0usize; self.e];
        let first = self.first_instant(lambdas, |s, t, done| {
            let (d, p) = s.counts(lambdas, t, done);
            d >= target && p >= ps.iter().copied().min().unwrap_or(0)
        });
        let base = self.summary_at(lambdas, first, &mut done);
        ps.iter()
            .map(|&p| {
                if base.total_products >= p {
                    return base;
                }
                // Distinct coverage only grows, so the total alone decides.
                let lc = self.nth_instant(lambdas, p);
                self.summary_at(lambdas, lc, &mut done)
            })
            .collect()
    }

    /// Instant of the `p`-th completion overall.
    ///
    /// The fluid count `sum_j clamp((t - lambda_j)/delta, 0, rows)` bounds the
    /// true count from above and exceeds it by less than one per node, so the
    /// answer lies within one `delta` after the instant `t*` where the fluid
    /// count reaches `p`.
    fn nth_instant(&self, lambdas: &[f64], p: usize) -> f64 {
        let total = |t: f64| lambdas.iter().map(|&l| completed(l, t, self.delta, self.rows)).sum::<usize>();
        let cap = self.rows as f64 * self.delta;
        let mut knots: Vec<(f64, f64)> = lambdas.iter().flat_map(|&l| [(l, 1.0), (l + cap, -1.0)]).collect();
        knots.sort_by(|a, b| a.0.total_cmp(&b.0));
        let need = p as f64 * self.delta;
        let (mut t, mut fluid, mut slope) = (knots[0].0, 0.0, 0.0);
        let mut star = f64::NAN;
        for &(x, ds) in &knots {
            if slope > 0.0 && fluid + slope * (x - t) >= need {
                star = t + (need - fluid) / slope;
                break;
            }
            fluid += slope * (x - t);
            t = x;
            slope += ds;
        }
        if star.is_nan() {
            star = t;
        }
        let mut cands: Vec<f64> = Vec::with_capacity(3 * lambdas.len());
        for &l in lambdas {
            let i0 = completed(l, star, self.delta, self.rows);
            cands.extend((i0.max(1)..=(i0 + 2).min(self.rows)).map(|i| l + i as f64 * self.delta));
        }
        cands.sort_by(f64::total_cmp);
        let i = cands.partition_point(|&t| total(t) < p);
        match cands.get(i) {
            Some(&t) => t,
            None => self.first_instant(lambdas, |_, t, _| total(t) >= p),
        }
    }

    /// Earliest completion instant at which the monotone predicate `holds`.
    fn first_instant(&self, lambdas: &[f64], holds: impl Fn(&Self, f64, &mut [usize]) -> bool) -> f64 {
        let mut done = vec![0usize; self.e];
        let mut lo = lambdas.iter().copied().fold(f64::INFINITY, f64::min);
        let mut hi = lambdas.iter().copied().fold(0.0, f64::max) + self.rows as f64 * self.delta;
        if holds(self, lo, &mut done) {
            hi = lo;
            lo = -1.0;
        }
        while hi - lo > self.delta / 4.0 {
            let mid = 0.5 * (lo + hi);
            if holds(self, mid, &mut done) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        // The first instant is the last completion at or before `hi` of some
        // node; each node has at most one in `(lo, hi]`.
        let mut cands: Vec<f64> = lambdas
            .iter()
            .filter_map(|&l| {
                let i = completed(l, hi, self.delta, self.rows);
                let t = l + i as f64 * self.delta;
                (i > 0 && t > lo).then_some(t)
            })
            .collect();
        cands.sort_by(f64::total_cmp);
        cands.into_iter().find(|&t| holds(self, t, &mut done)).unwrap_or(hi)
    }

    fn summary_at(&self, lambdas: &[f64], lc: f64, done: &mut [usize]) -> TrialSummary {
        let Shape::Cyclic { m, ref block_rows, target, discard, .. } = self.shape else { unreachable!() };
        let (distinct, total) = self.counts(lambdas, lc, done);
        let blocks = block_rows.len();
        let mut hist = vec![0usize; blocks + 1];
        let mut buf = vec![0usize; blocks];
        for c in 0..self.e {
            self.class_thresholds(done, c, m, block_rows, &mut buf);
            for s in 1..=blocks {
                let next = if s < blocks { buf[s] } else { 0 };
                hist[s] += buf[s - 1] - next;
            }
        }
        let mut left = if discard { target.min(distinct) } else { distinct };
        let retained = left;
        let mut inv = 0.0;
        for s in (1..=blocks).rev() {
            let take = hist[s].min(left);
            inv += take as f64 / s as f64;
            left -= take;
        }
        TrialSummary {
            lc,
            total_products: total,
            distinct,
            retained,
            inv_diversity_sum: inv,
            active_nodes: lambdas.iter().filter(|&&l| l < lc).count(),
        }
    }

    fn evaluate_batch(&self, lambdas: &[f64], wait_for: usize, sets: &[Vec<usize>], batch_size: usize) -> TrialSummary {
        let e = self.e;
        let finish: Vec<f64> = lambdas.iter().map(|&l| l + self.rows as f64 * self.delta).collect();
        let mut order: Vec<usize> = (0..e).collect();
        order.sort_by(|&a, &b| finish[a].total_cmp(&finish[b]).then(a.cmp(&b)));
        let lc = finish[order[wait_for - 1]];
        let mut finished = vec![false; e];
        for &j in &order[..wait_for] {
            finished[j] = true;
        }
        let mut distinct = 0;
        let mut inv = 0.0;
        for set in sets {
            let m = set.iter().filter(|&&j| finished[j]).count();
            if m > 0 {
                distinct += batch_size;
                inv += batch_size as f64 / m as f64;
            }
        }
        TrialSummary {
            lc,
            total_products: wait_for * self.rows,
            distinct,
            retained: distinct,
            inv_diversity_sum: inv,
            active_nodes: lambdas.iter().filter(|&&l| l < lc).count(),
        }
    }
}
