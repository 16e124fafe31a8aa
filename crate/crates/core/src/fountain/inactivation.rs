use std::ops::BitXorAssign;

use super::soliton::EncodingRow;

/// Operation counts of one inactivation decode.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DecodeCost {
    /// Binary additions on coefficient vectors; independent of how many
    /// right-hand sides are decoded.
    pub matrix_ops_add: u64,
    /// Row additions replayed once per right-hand-side vector.
    pub per_vector_ops_add: u64,
    /// Number of inactivated source symbols.
    pub inactivated: usize,
    pub success: bool,
}

impl DecodeCost {
    /// Total additions to decode `vectors` right-hand sides.
    pub fn total_ops(&self, vectors: usize) -> f64 {
        self.matrix_ops_add as f64 + vectors as f64 * self.per_vector_ops_add as f64
    }
}

/// Register program equivalent to the executed decode.
///
/// Register `r` starts as the right-hand side of received row `r`; each
/// `(dst, src)` performs `reg[dst] ^= reg[src]`. Afterwards source symbol
/// `c` sits in register `column_register[c]`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Schedule {
    pub ops: Vec<(usize, usize)>,
    pub column_register: Vec<usize>,
}

impl Schedule {
    pub fn replay<T: Copy + BitXorAssign>(&self, rhs: &[T]) -> Vec<T> {
        let mut reg = rhs.to_vec();
        for &(dst, src) in &self.ops {
            let v = reg[src];
            reg[dst] ^= v;
        }
        self.column_register.iter().map(|&r| reg[r]).collect()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Col {
    Unknown,
    Resolved(usize),
    Inactive(usize),
}

/// ML decoding of a binary system by peeling with inactivation.
pub fn inactivation_decode(rows: &[EncodingRow], k: usize) -> DecodeCost {
    run(rows, k, false).0
}

/// As [`inactivation_decode`], also returning the register program when the
/// decode succeeds.
pub fn inactivation_decode_with_schedule(rows: &[EncodingRow], k: usize) -> (DecodeCost, Option<Schedule>) {
    run(rows, k, true)
}

fn words(bits: usize) -> usize {
    bits.div_ceil(64)
}

fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

fn lowest_bit(v: &[u64]) -> Option<usize> {
    v.iter().enumerate().find(|(_, w)| **w != 0).map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
}

fn run(rows: &[EncodingRow], k: usize, record: bool) -> (DecodeCost, Option<Schedule>) {
    let n = rows.len();
    let mut cost = DecodeCost::default();
    let mut ops: Vec<(usize, usize)> = Vec::new();
    let push = |ops: &mut Vec<(usize, usize)>, cost: &mut DecodeCost, dst: usize, src: usize| {
        cost.per_vector_ops_add += 1;
        if record {
            ops.push((dst, src));
        }
    };

    // Column -> rows adjacency.
    let mut start = vec![0usize; k + 1];
    for row in rows {
        for &c in &row.neighbors {
            start[c + 1] += 1;
        }
    }
    for c in 0..k {
        start[c + 1] += start[c];
    }
    let mut fill = start.clone();
    let mut col_rows = vec![0usize; start[k]];
    for (r, row) in rows.iter().enumerate() {
        for &c in &row.neighbors {
            col_rows[fill[c]] = r;
            fill[c] += 1;
        }
    }

    let mut active_deg: Vec<usize> = rows.iter().map(EncodingRow::degree).collect();
    let mut active_xor: Vec<usize> = rows.iter().map(|r| r.neighbors.iter().fold(0, |a, &c| a ^ c)).collect();
    let mut used = vec![false; n];
    let mut state = vec![Col::Unknown; k];
    let mut ripple: Vec<usize> = (0..n).rev().filter(|&r| active_deg[r] == 1).collect();

    // An unknown column only appears in unused rows, so its residual degree
    // equals its full column degree and this order never changes.
    let mut by_degree: Vec<usize> = (0..k).collect();
    by_degree.sort_by_key(|&c| (std::cmp::Reverse(start[c + 1] - start[c]), c));
    let mut next_candidate = 0;

    let mut deps: Vec<Vec<u64>> = vec![Vec::new(); k];
    let mut resolved_order = Vec::new();
    let mut inactive_cols = Vec::new();

    for _ in 0..k {
        let mut pick = None;
        while let Some(r) = ripple.pop() {
            if !used[r] && active_deg[r] == 1 {
                pick = Some(r);
                break;
            }
        }
        let c = match pick {
            Some(r) => {
                let c = active_xor[r];
                used[r] = true;
                let s = inactive_cols.len();
                let mut dep = vec![0u64; words(s)];
                for &other in &rows[r].neighbors {
                    match state[other] {
                        Col::Resolved(src) => {
                            xor_into(&mut dep, &deps[other]);
                            cost.matrix_ops_add += s as u64;
                            push(&mut ops, &mut cost, r, src);
                        }
                        Col::Inactive(j) => dep[j / 64] ^= 1 << (j % 64),
                        Col::Unknown => debug_assert_eq!(other, c),
                    }
                }
                state[c] = Col::Resolved(r);
                deps[c] = dep;
                resolved_order.push(c);
                c
            }
            None => {
                while state[by_degree[next_candidate]] != Col::Unknown {
                    next_candidate += 1;
                }
                let c = by_degree[next_candidate];
                state[c] = Col::Inactive(inactive_cols.len());
                inactive_cols.push(c);
                c
            }
        };
        for &r in &col_rows[start[c]..start[c + 1]] {
            active_deg[r] -= 1;
            active_xor[r] ^= c;
            if active_deg[r] == 1 && !used[r] {
                ripple.push(r);
            }
        }
    }

    // Dense elimination of the inactivated block over the leftover rows.
    let s = inactive_cols.len();
    cost.inactivated = s;
    let mut basis: Vec<Option<(Vec<u64>, usize)>> = vec![None; s];
    let mut rank = 0;
    for r in (0..n).filter(|&r| !used[r]) {
        if rank == s {
            break;
        }
        let mut coef = vec![0u64; words(s)];
        for &c in &rows[r].neighbors {
            match state[c] {
                Col::Resolved(src) => {
                    xor_into(&mut coef, &deps[c]);
                    cost.matrix_ops_add += s as u64;
                    push(&mut ops, &mut cost, r, src);
                }
                Col::Inactive(j) => coef[j / 64] ^= 1 << (j % 64),
                Col::Unknown => unreachable!("every column is decided after peeling"),
            }
        }
        while let Some(p) = lowest_bit(&coef) {
            match &basis[p] {
                Some((b, src)) => {
                    xor_into(&mut coef, b);
                    cost.matrix_ops_add += s as u64;
                    push(&mut ops, &mut cost, r, *src);
                }
                None => {
                    basis[p] = Some((coef, r));
                    rank += 1;
                    break;
                }
            }
        }
    }
    if rank < s {
        return (cost, None);
    }

    // Back-solve the triangular block, highest pivot first.
    let mut inactive_reg = vec![0usize; s];
    for p in (0..s).rev() {
        let (b, reg) = basis[p].as_ref().expect("full rank");
        for q in p + 1..s {
            if b[q / 64] >> (q % 64) & 1 == 1 {
                push(&mut ops, &mut cost, *reg, inactive_reg[q]);
            }
        }
        inactive_reg[p] = *reg;
    }

    // Fold the inactive values into every peeled symbol.
    let mut column_register = vec![0usize; k];
    for &c in &resolved_order {
        let Col::Resolved(reg) = state[c] else { unreachable!() };
        for (w, &word) in deps[c].iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                let j = w * 64 + bits.trailing_zeros() as usize;
                bits &= bits - 1;
                push(&mut ops, &mut cost, reg, inactive_reg[j]);
            }
        }
        column_register[c] = reg;
    }
    for (j, &c) in inactive_cols.iter().enumerate() {
        column_register[c] = inactive_reg[j];
    }
    cost.success = true;
    let schedule = record.then_some(Schedule { ops, column_register });
    (cost, schedule)
}
