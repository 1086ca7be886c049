//! Community assignments.

use crate::error::{Error, Result};

/// A community assignment over `k` declared communities.
///
/// Labels are 0-based: each entry lies in `0..k`. Communities may be empty;
/// enumeration over all of `[k]^n` depends on that.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labels {
    z: Vec<usize>,
    k: usize,
}

impl Labels {
    pub fn new(z: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        for &label in &z {
            if label >= k {
                return Err(Error::LabelOutOfRange { label, k });
            }
        }
        Ok(Labels { z, k })
    }

    /// All nodes in community 0.
    pub fn constant(n: usize, k: usize) -> Result<Self> {
        Self::new(vec![0; n], k)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> usize {
        self.z[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.z
    }

    /// `n_a` for every community, including empty ones.
    pub fn community_sizes(&self) -> Vec<u64> {
        let mut sizes = vec![0u64; self.k];
        for &a in &self.z {
            sizes[a] += 1;
        }
        sizes
    }

    /// Reorder nodes: entry `i` of the result is `self` at `perm[i]`.
    pub fn permuted_nodes(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.z.len() {
            return Err(Error::DimensionMismatch(format!(
                "permutation has length {}, expected {}",
                perm.len(),
                self.z.len()
            )));
        }
        Self::new(perm.iter().map(|&p| self.z[p]).collect(), self.k)
    }

    /// Apply a relabeling `sigma` of the communities (`sigma` must be a
    /// permutation of `0..k`).
    pub fn relabeled(&self, sigma: &[usize]) -> Result<Self> {
        if sigma.len() != self.k {
            return Err(Error::DimensionMismatch(format!(
                "relabeling has length {}, expected k = {}",
                sigma.len(),
                self.k
            )));
        }
        Self::new(self.z.iter().map(|&a| sigma[a]).collect(), self.k)
    }
}
