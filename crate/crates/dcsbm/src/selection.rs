//! Penalized-evidence selection of the number of communities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::likelihood::{SearchStrategy, DEFAULT_ENUM_BUDGET};
use crate::marginal::{
    log_marginal_bracket, log_marginal_exact, EvidenceBackend, EvidenceResult, EvidenceValue,
};
use crate::network::Network;
use crate::sampler::substream;

/// Scores within this tolerance of the maximum count as tied.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Complexity charge `(k^3 + 3kn) ln(n + 1)`.
///
/// The `3kn` part pays for the `n` node weights; it is strictly increasing
/// in `k`, so flat evidence always selects `k = 1`.
pub fn penalty(k: usize, n: usize) -> f64 {
    let kf = k as f64;
    let nf = n as f64;
    (kf * kf * kf + 3.0 * kf * nf) * (nf + 1.0).ln()
}

/// Options for [`select_k`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectOptions {
    /// Enumeration cap for the exact backend (`k^n` labelings).
    pub budget: u64,
    /// With the exact backend, skip orders whose enumeration exceeds the
    /// budget instead of failing.
    pub allow_partial: bool,
    /// Greedy restarts for the bracket backend.
    pub restarts: usize,
    /// Greedy sweep cap for the bracket backend.
    pub max_sweeps: usize,
    /// Root seed; order `k` is scored with the substream of index `k`.
    pub seed: u64,
}

impl Default for SelectOptions {
    fn default() -> Self {
        SelectOptions {
            budget: DEFAULT_ENUM_BUDGET,
            allow_partial: false,
            restarts: 10,
            max_sweeps: 100,
            seed: 0,
        }
    }
}

/// One scored model order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionRow {
    pub k: usize,
    pub evidence: EvidenceResult,
    pub penalty: f64,
    /// `evidence.score() - penalty`.
    pub score: f64,
}

/// Output of [`select_k`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub n: usize,
    pub k_max: usize,
    pub backend: EvidenceBackend,
    pub rows: Vec<SelectionRow>,
    /// Selected order: the smallest maximizer of the penalized score.
    pub k_hat: usize,
    /// Every order within [`TIE_TOLERANCE`] of the best score.
    pub ties: Vec<usize>,
    /// Bracket backend only: orders whose score interval overlaps the
    /// winner's, so the ordering is not certified by the bounds.
    pub bracket_overlaps: Vec<usize>,
    /// Exact backend with `allow_partial`: orders skipped for budget.
    pub infeasible: Vec<usize>,
}

/// Choose the smallest score-maximizing order among `1..=k_max`.
///
/// The score of order `k` is `log p_k(x) - penalty(k, n)`; the bracket
/// backend substitutes its lower bound for `log p_k` and records which other
/// orders' intervals overlap the winner's.
pub fn select_k(
    x: &Network,
    k_max: usize,
    backend: EvidenceBackend,
    opts: &SelectOptions,
) -> Result<SelectionReport> {
    let n = x.n();
    if k_max == 0 {
        return Err(Error::InvalidParameter("k_max must be at least 1".into()));
    }
    if k_max > n {
        return Err(Error::InvalidParameter(format!(
            "k_max = {k_max} exceeds the number of nodes n = {n}"
        )));
    }

    let mut rows = Vec::with_capacity(k_max);
    let mut infeasible = Vec::new();
    for k in 1..=k_max {
        let evidence = match backend {
            EvidenceBackend::Exact => match log_marginal_exact(x, k, opts.budget) {
                Ok(e) => e,
                Err(Error::BudgetExceeded { .. }) if opts.allow_partial => {
                    infeasible.push(k);
                    continue;
                }
                Err(Error::BudgetExceeded { .. }) => {
                    return Err(Error::InfeasibleOrders(
                        (k..=k_max)
                            .filter(|&kk| {
                                crate::enumerate::check_budget(kk, n, opts.budget).is_err()
                            })
                            .collect(),
                    ));
                }
                Err(e) => return Err(e),
            },
            EvidenceBackend::Bracket => {
                let mut rng = substream(opts.seed, k as u64);
                log_marginal_bracket(
                    x,
                    k,
                    SearchStrategy::Greedy {
                        restarts: opts.restarts,
                        max_sweeps: opts.max_sweeps,
                    },
                    &mut rng,
                )?
            }
        };
        let pen = penalty(k, n);
        rows.push(SelectionRow {
            k,
            evidence,
            penalty: pen,
            score: evidence.score() - pen,
        });
    }

    if rows.is_empty() {
        return Err(Error::InfeasibleOrders(infeasible));
    }

    let scored: Vec<(usize, f64)> = rows.iter().map(|r| (r.k, r.score)).collect();
    let k_hat = smallest_argmax(&scored).expect("rows is nonempty");
    let best = rows
        .iter()
        .map(|r| r.score)
        .fold(f64::NEG_INFINITY, f64::max);
    let ties: Vec<usize> = rows
        .iter()
        .filter(|r| best - r.score <= TIE_TOLERANCE)
        .map(|r| r.k)
        .collect();

    let mut bracket_overlaps = Vec::new();
    if backend == EvidenceBackend::Bracket {
        let winner = rows
            .iter()
            .find(|r| r.k == k_hat)
            .expect("winner row exists");
        let winner_hi = interval(winner).1;
        for row in &rows {
            if row.k == k_hat {
                continue;
            }
            let (lo, hi) = interval(row);
            if hi >= winner.score && lo <= winner_hi {
                bracket_overlaps.push(row.k);
            }
        }
    }

    Ok(SelectionReport {
        n,
        k_max,
        backend,
        rows,
        k_hat,
        ties,
        bracket_overlaps,
        infeasible,
    })
}

fn interval(row: &SelectionRow) -> (f64, f64) {
    match row.evidence.value {
        EvidenceValue::Exact { log_p } => (log_p - row.penalty, log_p - row.penalty),
        EvidenceValue::Bracket { lower, upper, .. } => (lower - row.penalty, upper - row.penalty),
    }
}

/// Smallest-index argmax with the tie tolerance; factored out for direct
/// testing of the tie rule.
pub(crate) fn smallest_argmax(scores: &[(usize, f64)]) -> Option<usize> {
    let best = scores
        .iter()
        .map(|&(_, s)| s)
        .fold(f64::NEG_INFINITY, f64::max);
    scores
        .iter()
        .filter(|&&(_, s)| best - s <= TIE_TOLERANCE)
        .map(|&(k, _)| k)
        .min()
}
