//! Multigraph adjacency counts with the doubled-diagonal convention.

use crate::error::{Error, Result};

/// Symmetric matrix of nonnegative edge multiplicities.
///
/// Off-diagonal entry `x[i][j]` is the number of (unoriented) edges between
/// `i` and `j`; diagonal entry `x[i][i]` is **twice** the number of
/// self-loops at `i`, so the handshake identity `sum_j x[i][j] = degree(i)`
/// holds with self-loops contributing 2 to the degree.
///
/// Construction validates symmetry and even diagonals, so a `Network` value
/// is always structurally valid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    n: usize,
    counts: Vec<u64>,
    degrees: Vec<u64>,
    total: u64,
}

impl Network {
    /// Build from a dense row-major vector of length `n * n`.
    pub fn new(n: usize, counts: Vec<u64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "network needs at least one node".into(),
            ));
        }
        if counts.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for n = {}, got {}",
                n * n,
                n,
                counts.len()
            )));
        }
        for i in 0..n {
            if !counts[i * n + i].is_multiple_of(2) {
                return Err(Error::OddDiagonal {
                    i,
                    value: counts[i * n + i],
                });
            }
            for j in (i + 1)..n {
                if counts[i * n + j] != counts[j * n + i] {
                    return Err(Error::NotSymmetric { i, j });
                }
            }
        }
        let degrees: Vec<u64> = (0..n)
            .map(|i| counts[i * n..(i + 1) * n].iter().sum())
            .collect();
        let total = degrees.iter().sum();
        Ok(Network {
            n,
            counts,
            degrees,
            total,
        })
    }

    /// Build from nested rows.
    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let n = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
        }
        Self::new(n, rows.iter().flatten().copied().collect())
    }

    /// The empty network on `n` nodes.
    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(n, vec![0; n * n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u64] {
        &self.counts[i * self.n..(i + 1) * self.n]
    }

    /// Node degree `d_i = sum_j x[i][j]`.
    #[inline]
    pub fn degree(&self, i: usize) -> u64 {
        self.degrees[i]
    }

    pub fn degrees(&self) -> &[u64] {
        &self.degrees
    }

    /// `sum_{i,j} x[i][j]`, which equals the degree sum and twice the edge
    /// count.
    pub fn total_count(&self) -> u64 {
        self.total
    }

    /// Number of edges counting self-loops once: `total_count / 2`.
    pub fn edge_count(&self) -> u64 {
        self.total / 2
    }

    /// Membership in the bounded-entry event: every `x[i][j] <= ln n`
    /// (natural log, inclusive).
    pub fn in_omega(&self) -> bool {
        let bound = (self.n as f64).ln();
        self.counts.iter().all(|&c| c as f64 <= bound)
    }

    /// Relabel nodes by `perm` (node `i` of the result is node `perm[i]` of
    /// `self`).
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "permutation has length {}, expected {}",
                perm.len(),
                self.n
            )));
        }
        let mut seen = vec![false; self.n];
        for &p in perm {
            if p >= self.n || seen[p] {
                return Err(Error::InvalidParameter("not a permutation".into()));
            }
            seen[p] = true;
        }
        let mut counts = vec![0u64; self.n * self.n];
        for i in 0..self.n {
            for j in 0..self.n {
                counts[i * self.n + j] = self.count(perm[i], perm[j]);
            }
        }
        Self::new(self.n, counts)
    }

    /// Nonzero entries of the upper triangle (including the diagonal) as
    /// `(i, j, count)` with `i <= j`, in row-major order.
    pub fn nonzero_upper(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        (0..self.n).flat_map(move |i| {
            (i..self.n).filter_map(move |j| {
                let c = self.count(i, j);
                (c != 0).then_some((i, j, c))
            })
        })
    }
}
