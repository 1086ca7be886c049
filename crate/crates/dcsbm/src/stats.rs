//! Sufficient statistics of a `(network, labels)` pair.

use crate::error::{Error, Result};
use crate::labels::Labels;
use crate::network::Network;

/// Block counters for a network under a `k`-community assignment.
///
/// Two block edge-count conventions coexist and both are kept:
/// `block_edges[a][b]` counts each edge once (`o`), with self-pairs carrying
/// the half convention so `o_aa` counts within-community edges once; the
/// symmetric `sym_block_edges` (`o~`) counts ordered pairs, so
/// `o~_aa = 2 o_aa` and row sums give the block degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct SuffStats {
    pub n: usize,
    pub k: usize,
    /// Community sizes `n_a`.
    pub sizes: Vec<u64>,
    /// Pair counts `n_ab` (`n_a n_b` off-diagonal, `n_a^2 / 2` on the
    /// diagonal), row-major `k * k`.
    pub pair_counts: Vec<f64>,
    /// Edge counts `o_ab`, row-major `k * k`.
    pub block_edges: Vec<u64>,
    /// Symmetric edge counts `o~_ab`, row-major `k * k`.
    pub sym_block_edges: Vec<u64>,
    /// Node degrees `d_i`.
    pub degrees: Vec<u64>,
    /// Total block degrees `d^t_a = sum_{i in a} d_i`.
    pub block_degrees: Vec<u64>,
}

impl SuffStats {
    #[inline]
    pub fn pair_count(&self, a: usize, b: usize) -> f64 {
        self.pair_counts[a * self.k + b]
    }

    #[inline]
    pub fn block_edge(&self, a: usize, b: usize) -> u64 {
        self.block_edges[a * self.k + b]
    }

    #[inline]
    pub fn sym_block_edge(&self, a: usize, b: usize) -> u64 {
        self.sym_block_edges[a * self.k + b]
    }
}

/// Compute every counter for `(x, z)`.
pub fn compute_stats(x: &Network, z: &Labels) -> Result<SuffStats> {
    let n = x.n();
    let k = z.k();
    if z.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "labels cover {} nodes, network has {n}",
            z.len()
        )));
    }

    let sizes = z.community_sizes();
    let degrees = x.degrees().to_vec();

    let mut sym = vec![0u64; k * k];
    for i in 0..n {
        let zi = z.get(i);
        let row = x.row(i);
        for (j, &c) in row.iter().enumerate() {
            if c != 0 {
                sym[zi * k + z.get(j)] += c;
            }
        }
    }

    let mut block_edges = vec![0u64; k * k];
    for a in 0..k {
        for b in 0..k {
            block_edges[a * k + b] = if a == b {
                sym[a * k + a] / 2
            } else {
                sym[a * k + b]
            };
        }
    }

    let mut pair_counts = vec![0.0f64; k * k];
    for a in 0..k {
        for b in 0..k {
            pair_counts[a * k + b] = if a == b {
                (sizes[a] * sizes[a]) as f64 / 2.0
            } else {
                (sizes[a] * sizes[b]) as f64
            };
        }
    }

    let mut block_degrees = vec![0u64; k];
    for i in 0..n {
        block_degrees[z.get(i)] += degrees[i];
    }

    Ok(SuffStats {
        n,
        k,
        sizes,
        pair_counts,
        block_edges,
        sym_block_edges: sym,
        degrees,
        block_degrees,
    })
}
