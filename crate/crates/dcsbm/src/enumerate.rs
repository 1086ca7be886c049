//! Exhaustive walks over label space with incrementally maintained counters.
//!
//! The walk assigns nodes in index order and keeps the block counters exact
//! (all integers), so a visitor pays `O(k^2)` per labeling instead of
//! recomputing statistics from scratch. In canonical mode only
//! restricted-growth strings are visited (the lexicographically smallest
//! member of each relabeling orbit); a visitor summing a label-symmetric
//! quantity must weight each string by `k! / (k - b)!` where `b` is the
//! number of occupied blocks.

use crate::error::{Error, Result};
use crate::network::Network;

/// Running block counters during an enumeration walk.
#[derive(Debug, Clone)]
pub struct BlockCounts {
    pub k: usize,
    /// `n_a` over assigned nodes.
    pub sizes: Vec<u64>,
    /// `d^t_a` over assigned nodes.
    pub block_degrees: Vec<u64>,
    /// Symmetric block edge counts `o~_ab` over assigned nodes, `k * k`.
    pub sym_edges: Vec<u64>,
}

impl BlockCounts {
    fn new(k: usize) -> Self {
        BlockCounts {
            k,
            sizes: vec![0; k],
            block_degrees: vec![0; k],
            sym_edges: vec![0; k * k],
        }
    }

    #[inline]
    pub fn sym(&self, a: usize, b: usize) -> u64 {
        self.sym_edges[a * self.k + b]
    }
}

/// `k^n` if it fits in the budget, else an error.
pub fn check_budget(k: usize, n: usize, budget: u64) -> Result<u64> {
    let mut total: u64 = 1;
    for _ in 0..n {
        total = match total.checked_mul(k as u64) {
            Some(t) if t <= budget => t,
            _ => return Err(Error::BudgetExceeded { k, n, budget }),
        };
    }
    Ok(total)
}

/// Visit labelings of `x` over `k` communities in lexicographic order.
///
/// The visitor receives the labeling, the counters, and the number of
/// occupied blocks. With `canonical = true` only restricted-growth strings
/// are visited.
pub fn for_each_labeling<F>(x: &Network, k: usize, canonical: bool, visit: &mut F)
where
    F: FnMut(&[usize], &BlockCounts, usize),
{
    let n = x.n();
    let mut counts = BlockCounts::new(k);
    let mut z = vec![0usize; n];
    descend(x, k, canonical, 0, 0, &mut z, &mut counts, visit);
}

#[allow(clippy::too_many_arguments)]
fn descend<F>(
    x: &Network,
    k: usize,
    canonical: bool,
    pos: usize,
    used: usize,
    z: &mut Vec<usize>,
    counts: &mut BlockCounts,
    visit: &mut F,
) where
    F: FnMut(&[usize], &BlockCounts, usize),
{
    let n = x.n();
    if pos == n {
        visit(z, counts, used);
        return;
    }
    let limit = if canonical { (used + 1).min(k) } else { k };
    let row = x.row(pos);
    let degree = x.degree(pos);
    for a in 0..limit {
        z[pos] = a;
        counts.sizes[a] += 1;
        counts.block_degrees[a] += degree;
        for j in 0..pos {
            let c = row[j];
            if c != 0 {
                let b = z[j];
                counts.sym_edges[a * k + b] += c;
                counts.sym_edges[b * k + a] += c;
            }
        }
        counts.sym_edges[a * k + a] += row[pos];

        let next_used = used + usize::from(a == used);
        descend(x, k, canonical, pos + 1, next_used, z, counts, visit);

        counts.sym_edges[a * k + a] -= row[pos];
        for j in 0..pos {
            let c = row[j];
            if c != 0 {
                let b = z[j];
                counts.sym_edges[a * k + b] -= c;
                counts.sym_edges[b * k + a] -= c;
            }
        }
        counts.sizes[a] -= 1;
        counts.block_degrees[a] -= degree;
    }
}

/// `ln(k! / (k - b)!)` for `b = 0..=min(n, k)`: the orbit size of a
/// canonical string occupying `b` blocks.
pub fn ln_orbit_sizes(k: usize, n: usize) -> Vec<f64> {
    let top = n.min(k);
    let mut out = Vec::with_capacity(top + 1);
    let mut acc = 0.0f64;
    out.push(acc);
    for b in 0..top {
        acc += ((k - b) as f64).ln();
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::Labels;
    use crate::stats::compute_stats;

    #[test]
    fn counters_match_fresh_computation() {
        let x = Network::from_rows(&[
            vec![2, 1, 0, 2],
            vec![1, 0, 3, 0],
            vec![0, 3, 0, 1],
            vec![2, 0, 1, 0],
        ])
        .unwrap();
        let k = 3;
        let mut visited = 0u64;
        for_each_labeling(&x, k, false, &mut |z, counts, _used| {
            visited += 1;
            let labels = Labels::new(z.to_vec(), k).unwrap();
            let fresh = compute_stats(&x, &labels).unwrap();
            assert_eq!(counts.sizes, fresh.sizes);
            assert_eq!(counts.block_degrees, fresh.block_degrees);
            assert_eq!(counts.sym_edges, fresh.sym_block_edges);
        });
        assert_eq!(visited, 81);
    }

    #[test]
    fn canonical_orbit_sizes_cover_label_space() {
        // sum over canonical strings of k!/(k-b)! must equal k^n.
        let x = Network::zeros(5).unwrap();
        for k in 1..=3usize {
            let ln_mult = ln_orbit_sizes(k, 5);
            let mut total = 0.0f64;
            let mut canonical_count = 0u64;
            for_each_labeling(&x, k, true, &mut |_z, _c, used| {
                canonical_count += 1;
                total += ln_mult[used].exp();
            });
            let expected = (k as u64).pow(5) as f64;
            assert!(
                (total - expected).abs() < 1e-9,
                "k = {k}: {total} vs {expected}"
            );
            assert!(canonical_count <= (k as u64).pow(5));
        }
    }

    #[test]
    fn budget_gate() {
        assert_eq!(check_budget(3, 4, 100).unwrap(), 81);
        assert!(matches!(
            check_budget(10, 30, 10_000_000),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}
