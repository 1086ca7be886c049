//! Joint log-likelihood, closed-form MLEs, profile likelihood, and label
//! search.

use rand::Rng;

use crate::enumerate::{check_budget, for_each_labeling};
use crate::error::{Error, Result};
use crate::labels::Labels;
use crate::network::Network;
use crate::params::ModelParams;
use crate::special::{ln_factorial, x_ln_x};
use crate::stats::{compute_stats, SuffStats};

/// Default cap on exhaustive enumeration (`k^n` label vectors).
pub const DEFAULT_ENUM_BUDGET: u64 = 10_000_000;

/// Minimum objective gain accepted by the greedy ascent. Well above the
/// float noise of the counter-difference evaluation at desk scale.
const GREEDY_EPS: f64 = 1e-6;

/// Log of the likelihood normalizer:
/// `log c(x) = sum_{i<j} ln(x_ij!) + sum_i [(x_ii/2) ln 2 + ln((x_ii/2)!)]`.
pub fn log_c(x: &Network) -> f64 {
    let n = x.n();
    let mut acc = 0.0;
    for i in 0..n {
        let loops = x.count(i, i) / 2;
        acc += loops as f64 * std::f64::consts::LN_2 + ln_factorial(loops);
        for j in (i + 1)..n {
            acc += ln_factorial(x.count(i, j));
        }
    }
    acc
}

fn check_shapes(x: &Network, z: &Labels, params: &ModelParams) -> Result<()> {
    if z.len() != x.n() {
        return Err(Error::DimensionMismatch(format!(
            "labels cover {} nodes, network has {}",
            z.len(),
            x.n()
        )));
    }
    if params.n() != x.n() {
        return Err(Error::DimensionMismatch(format!(
            "params cover {} nodes, network has {}",
            params.n(),
            x.n()
        )));
    }
    if params.k() != z.k() {
        return Err(Error::DimensionMismatch(format!(
            "params have k = {}, labels have k = {}",
            params.k(),
            z.k()
        )));
    }
    let neg = |v: f64| !v.is_finite() || v < 0.0;
    if params.pi().iter().copied().any(neg)
        || params.weights().iter().copied().any(neg)
        || params.lambda_tilde_flat().iter().copied().any(neg)
        || neg(params.rho())
    {
        return Err(Error::InvalidParameter(
            "pi, weights, rho, and lambda_tilde must be finite and nonnegative".into(),
        ));
    }
    Ok(())
}

/// `log p(x | z, w, lambda)`.
///
/// Boundary parameters follow the `0 ln 0 = 0` convention: a zero rate or a
/// zero weight only matters when the data put mass there, in which case the
/// function returns `-inf` rather than an error.
pub fn log_conditional(x: &Network, z: &Labels, params: &ModelParams) -> Result<f64> {
    check_shapes(x, z, params)?;
    let stats = compute_stats(x, z)?;
    let mut acc = -log_c(x);
    for i in 0..x.n() {
        let d = stats.degrees[i];
        if d > 0 {
            let w = params.weights()[i];
            if w == 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
            acc += d as f64 * w.ln();
        }
    }
    let k = z.k();
    for a in 0..k {
        for b in a..k {
            let rate = params.lambda(a, b);
            let o = stats.block_edge(a, b);
            if o > 0 {
                if rate == 0.0 {
                    return Ok(f64::NEG_INFINITY);
                }
                acc += o as f64 * rate.ln();
            }
            acc -= stats.pair_count(a, b) * rate;
        }
    }
    Ok(acc)
}

/// `log p(z, x | pi, lambda, w) = sum_a n_a ln pi_a + log p(x | z, w, lambda)`.
pub fn log_joint(x: &Network, z: &Labels, params: &ModelParams) -> Result<f64> {
    check_shapes(x, z, params)?;
    let sizes = z.community_sizes();
    let mut acc = 0.0;
    for (a, &na) in sizes.iter().enumerate() {
        if na > 0 {
            let p = params.pi()[a];
            if p == 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
            acc += na as f64 * p.ln();
        }
    }
    Ok(acc + log_conditional(x, z, params)?)
}

/// Closed-form maximum-likelihood plug-ins for `(x, z)`:
/// `pi_a = n_a / n`, `lambda_ab = o_ab / n_ab`, and
/// `w_i = n_a d_i / d^t_a` for `i` in community `a`.
///
/// Degenerate denominators resolve by convention: empty blocks get rate 0,
/// and a community with zero total degree gets unit weights (any value gives
/// the same likelihood there).
pub fn mle_params(x: &Network, z: &Labels) -> Result<ModelParams> {
    let stats = compute_stats(x, z)?;
    let n = stats.n as f64;
    let k = stats.k;
    let pi: Vec<f64> = stats.sizes.iter().map(|&s| s as f64 / n).collect();
    let mut lambda = vec![0.0f64; k * k];
    for a in 0..k {
        for b in 0..k {
            let pairs = stats.pair_count(a, b);
            if pairs > 0.0 {
                lambda[a * k + b] = stats.block_edge(a, b) as f64 / pairs;
            }
        }
    }
    let mut weights = vec![1.0f64; stats.n];
    for (i, w) in weights.iter_mut().enumerate() {
        let a = z.get(i);
        let dt = stats.block_degrees[a];
        if dt > 0 {
            *w = stats.sizes[a] as f64 * stats.degrees[i] as f64 / dt as f64;
        }
    }
    ModelParams::from_flat(pi, lambda, 1.0, weights)
}

/// Data-only constant of the profile likelihood:
/// `-log c(x) - E + sum_i d_i ln d_i - n ln n`, with `E` the edge count.
fn profile_constant(x: &Network) -> f64 {
    let degree_entropy: f64 = x.degrees().iter().map(|&d| x_ln_x(d as f64)).sum();
    -log_c(x) - x.edge_count() as f64 + degree_entropy - (x.n() as f64) * (x.n() as f64).ln()
}

/// Label-dependent part of the profile likelihood, from counters:
/// `sum_a n_a ln n_a + (1/2) sum_ab o~ ln o~ - sum_a d^t ln d^t`.
fn profile_core(sizes: &[u64], sym_edges: &[u64], block_degrees: &[u64]) -> f64 {
    let mut acc = 0.0;
    for &s in sizes {
        acc += x_ln_x(s as f64);
    }
    for &o in sym_edges {
        acc += 0.5 * x_ln_x(o as f64);
    }
    for &d in block_degrees {
        acc -= x_ln_x(d as f64);
    }
    acc
}

/// `log sup_theta p(x, z | theta)`: the joint likelihood maximized over
/// `(pi, lambda, w)` at fixed labels. Equals
/// `log_joint(x, z, mle_params(x, z))` exactly, with all `0 ln 0 = 0`
/// conventions applied.
pub fn log_profile_sup(x: &Network, z: &Labels) -> Result<f64> {
    let stats = compute_stats(x, z)?;
    Ok(profile_constant(x)
        + profile_core(&stats.sizes, &stats.sym_block_edges, &stats.block_degrees))
}

/// Same value, reusing precomputed sufficient statistics.
pub fn log_profile_sup_from_stats(x: &Network, stats: &SuffStats) -> f64 {
    profile_constant(x) + profile_core(&stats.sizes, &stats.sym_block_edges, &stats.block_degrees)
}

/// How to search label space for the profile maximizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SearchStrategy {
    /// Enumerate every labeling (up to relabeling symmetry); exact argmax,
    /// ties broken toward the lexicographically smallest labeling. Refuses
    /// when `k^n` exceeds the budget.
    Exhaustive { budget: u64 },
    /// Best-improvement single-node ascent from `restarts` uniform random
    /// labelings plus one degree-sorted labeling.
    Greedy { restarts: usize, max_sweeps: usize },
}

impl Default for SearchStrategy {
    fn default() -> Self {
        SearchStrategy::Greedy {
            restarts: 10,
            max_sweeps: 100,
        }
    }
}

/// Outcome of a profile-likelihood label search.
#[derive(Debug, Clone)]
pub struct ProfileResult {
    pub labels: Labels,
    /// `log sup_theta p(x, labels | theta)`.
    pub log_sup: f64,
    /// Whether `labels` is the exact global argmax.
    pub exhaustive: bool,
    /// Number of ascent starts performed (0 for exhaustive search).
    pub restarts: usize,
    /// Total accepted single-node moves across all starts.
    pub moves: u64,
}

/// Maximize the profile likelihood over labelings in `[k]^n`.
pub fn search_profile_labels<R: Rng + ?Sized>(
    x: &Network,
    k: usize,
    strategy: SearchStrategy,
    rng: &mut R,
) -> Result<ProfileResult> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    match strategy {
        SearchStrategy::Exhaustive { budget } => {
            check_budget(k, x.n(), budget)?;
            let mut best_core = f64::NEG_INFINITY;
            let mut best_z: Vec<usize> = Vec::new();
            for_each_labeling(x, k, true, &mut |z, counts, _used| {
                let core = profile_core(&counts.sizes, &counts.sym_edges, &counts.block_degrees);
                if core > best_core {
                    best_core = core;
                    best_z = z.to_vec();
                }
            });
            Ok(ProfileResult {
                labels: Labels::new(best_z, k)?,
                log_sup: profile_constant(x) + best_core,
                exhaustive: true,
                restarts: 0,
                moves: 0,
            })
        }
        SearchStrategy::Greedy {
            restarts,
            max_sweeps,
        } => {
            let candidates = greedy_candidates(x, k, restarts, max_sweeps, rng)?;
            let mut moves = 0;
            let mut best: Option<(Labels, f64)> = None;
            for c in candidates {
                moves += c.moves;
                if best.as_ref().is_none_or(|(_, v)| c.log_sup > *v) {
                    best = Some((c.labels, c.log_sup));
                }
            }
            let (labels, log_sup) = best.expect("at least the degree-sorted start runs");
            Ok(ProfileResult {
                labels,
                log_sup,
                exhaustive: false,
                restarts: restarts + 1,
                moves,
            })
        }
    }
}

/// One local optimum of the greedy ascent.
#[derive(Debug, Clone)]
pub(crate) struct AscentOutcome {
    pub labels: Labels,
    pub log_sup: f64,
    pub moves: u64,
}

/// Run the ascent from every start and return each local optimum.
pub(crate) fn greedy_candidates<R: Rng + ?Sized>(
    x: &Network,
    k: usize,
    restarts: usize,
    max_sweeps: usize,
    rng: &mut R,
) -> Result<Vec<AscentOutcome>> {
    let n = x.n();
    let mut outcomes = Vec::with_capacity(restarts + 1);

    // Degree-sorted start: nodes ranked by degree, split into k slabs.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (x.degree(i), i));
    let mut by_degree = vec![0usize; n];
    for (rank, &i) in order.iter().enumerate() {
        by_degree[i] = rank * k / n;
    }
    outcomes.push(ascend(x, Labels::new(by_degree, k)?, max_sweeps));

    for _ in 0..restarts {
        let z: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        outcomes.push(ascend(x, Labels::new(z, k)?, max_sweeps));
    }
    Ok(outcomes)
}

struct AscentState<'a> {
    x: &'a Network,
    k: usize,
    z: Vec<usize>,
    sizes: Vec<u64>,
    block_degrees: Vec<u64>,
    sym: Vec<u64>,
}

impl<'a> AscentState<'a> {
    fn new(x: &'a Network, labels: Labels) -> Self {
        let k = labels.k();
        let stats = compute_stats(x, &labels).expect("labels validated by caller");
        AscentState {
            x,
            k,
            z: labels.as_slice().to_vec(),
            sizes: stats.sizes,
            block_degrees: stats.block_degrees,
            sym: stats.sym_block_edges,
        }
    }

    /// Edge mass from node `i` to each block, excluding `i` itself, plus the
    /// doubled self-loop entry.
    fn node_sums(&self, i: usize, s: &mut [u64]) -> u64 {
        s.fill(0);
        let row = self.x.row(i);
        for (j, &c) in row.iter().enumerate() {
            if c != 0 && j != i {
                s[self.z[j]] += c;
            }
        }
        row[i]
    }

    /// Objective change for moving node `i` from its block to `to`.
    fn move_gain(&self, i: usize, to: usize, s: &[u64], self_loop: u64) -> f64 {
        let from = self.z[i];
        debug_assert_ne!(from, to);
        let d = self.x.degree(i);
        let g = |v: u64| x_ln_x(v as f64);

        let mut gain = g(self.sizes[from] - 1) - g(self.sizes[from]) + g(self.sizes[to] + 1)
            - g(self.sizes[to]);
        gain -= g(self.block_degrees[from] - d) - g(self.block_degrees[from])
            + g(self.block_degrees[to] + d)
            - g(self.block_degrees[to]);

        for (b, &sb) in s.iter().enumerate() {
            if b == from || b == to || sb == 0 {
                continue;
            }
            gain += g(self.sym[from * self.k + b] - sb) - g(self.sym[from * self.k + b]);
            gain += g(self.sym[to * self.k + b] + sb) - g(self.sym[to * self.k + b]);
        }
        let ff = self.sym[from * self.k + from];
        let tt = self.sym[to * self.k + to];
        let ft = self.sym[from * self.k + to];
        gain += 0.5 * (g(ff - 2 * s[from] - self_loop) - g(ff));
        gain += 0.5 * (g(tt + 2 * s[to] + self_loop) - g(tt));
        gain += g(ft + s[from] - s[to]) - g(ft);
        gain
    }

    fn apply_move(&mut self, i: usize, to: usize, s: &[u64], self_loop: u64) {
        let from = self.z[i];
        let d = self.x.degree(i);
        self.sizes[from] -= 1;
        self.sizes[to] += 1;
        self.block_degrees[from] -= d;
        self.block_degrees[to] += d;
        for (b, &sb) in s.iter().enumerate() {
            if b == from || b == to || sb == 0 {
                continue;
            }
            self.sym[from * self.k + b] -= sb;
            self.sym[b * self.k + from] -= sb;
            self.sym[to * self.k + b] += sb;
            self.sym[b * self.k + to] += sb;
        }
        self.sym[from * self.k + from] -= 2 * s[from] + self_loop;
        self.sym[to * self.k + to] += 2 * s[to] + self_loop;
        let ft = s[from] as i64 - s[to] as i64;
        let old = self.sym[from * self.k + to] as i64;
        self.sym[from * self.k + to] = (old + ft) as u64;
        self.sym[to * self.k + from] = (old + ft) as u64;
        self.z[i] = to;
    }
}

fn ascend(x: &Network, start: Labels, max_sweeps: usize) -> AscentOutcome {
    let k = start.k();
    let mut state = AscentState::new(x, start);
    let mut moves = 0u64;
    let mut s = vec![0u64; k];
    if k > 1 {
        for _ in 0..max_sweeps {
            let mut moved = false;
            for i in 0..x.n() {
                let self_loop = state.node_sums(i, &mut s);
                let from = state.z[i];
                let mut best: Option<(usize, f64)> = None;
                for to in 0..k {
                    if to == from {
                        continue;
                    }
                    let gain = state.move_gain(i, to, &s, self_loop);
                    if gain > GREEDY_EPS && best.is_none_or(|(_, g)| gain > g) {
                        best = Some((to, gain));
                    }
                }
                if let Some((to, _)) = best {
                    state.apply_move(i, to, &s, self_loop);
                    moved = true;
                    moves += 1;
                }
            }
            if !moved {
                break;
            }
        }
    }
    let core = profile_core(&state.sizes, &state.sym, &state.block_degrees);
    AscentOutcome {
        labels: Labels::new(state.z, k).expect("ascent preserves label range"),
        log_sup: profile_constant(x) + core,
        moves,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::substream;

    fn labels(z: &[usize], k: usize) -> Labels {
        Labels::new(z.to_vec(), k).unwrap()
    }

    #[test]
    fn normalizer_examples() {
        let one_edge = Network::from_rows(&[vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(log_c(&one_edge), 0.0);

        let self_loop = Network::from_rows(&[vec![2]]).unwrap();
        assert!((log_c(&self_loop) - std::f64::consts::LN_2).abs() < 1e-15);

        let triple = Network::from_rows(&[vec![0, 3], vec![3, 0]]).unwrap();
        assert!((log_c(&triple) - 6f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn joint_examples() {
        // Empty network, one community: only the -n_11 lambda term survives.
        let x = Network::zeros(2).unwrap();
        let z = labels(&[0, 0], 1);
        let p = ModelParams::new(vec![1.0], &[vec![1.0]], 1.0, vec![1.0, 1.0]).unwrap();
        assert!((log_joint(&x, &z, &p).unwrap() - (-2.0)).abs() < 1e-12);

        // One edge, rate 2: ln 2 - 4.
        let x = Network::from_rows(&[vec![0, 1], vec![1, 0]]).unwrap();
        let p2 = ModelParams::new(vec![1.0], &[vec![2.0]], 1.0, vec![1.0, 1.0]).unwrap();
        let expect = std::f64::consts::LN_2 - 4.0;
        assert!((log_joint(&x, &z, &p2).unwrap() - expect).abs() < 1e-12);

        // Zero weight on a node with positive degree: -inf sentinel.
        let p3 = ModelParams::new(vec![1.0], &[vec![2.0]], 1.0, vec![0.0, 1.0]).unwrap();
        assert_eq!(log_joint(&x, &z, &p3).unwrap(), f64::NEG_INFINITY);

        // Negative rate is an error, not a sentinel.
        let p4 = ModelParams::new(vec![1.0], &[vec![-1.0]], 1.0, vec![1.0, 1.0]).unwrap();
        assert!(log_joint(&x, &z, &p4).is_err());
    }

    #[test]
    fn mle_examples() {
        let x = Network::from_rows(&[vec![0, 3], vec![3, 0]]).unwrap();
        let z = labels(&[0, 1], 2);
        let m = mle_params(&x, &z).unwrap();
        assert_eq!(m.pi(), &[0.5, 0.5]);
        assert_eq!(m.lambda_tilde(0, 1), 3.0);
        assert_eq!(m.lambda_tilde(0, 0), 0.0);
        assert_eq!(m.lambda_tilde(1, 1), 0.0);
        assert_eq!(m.weights(), &[1.0, 1.0]);

        // Zero-degree convention.
        let x0 = Network::zeros(2).unwrap();
        let m0 = mle_params(&x0, &labels(&[0, 0], 1)).unwrap();
        assert_eq!(m0.weights(), &[1.0, 1.0]);
    }

    #[test]
    fn profile_matches_joint_at_mle() {
        let mut rng = substream(21, 0);
        for trial in 0..250 {
            let n = 2 + (trial % 7);
            let k = 1 + (trial % 3);
            let mut counts = vec![0u64; n * n];
            for i in 0..n {
                counts[i * n + i] = 2 * rng.random_range(0..2u64);
                for j in (i + 1)..n {
                    let c = rng.random_range(0..4u64);
                    counts[i * n + j] = c;
                    counts[j * n + i] = c;
                }
            }
            let x = Network::new(n, counts).unwrap();
            let z = Labels::new((0..n).map(|_| rng.random_range(0..k)).collect(), k).unwrap();
            let sup = log_profile_sup(&x, &z).unwrap();
            let joint = log_joint(&x, &z, &mle_params(&x, &z).unwrap()).unwrap();
            assert!(
                (sup - joint).abs() < 1e-9,
                "profile {sup} vs joint-at-mle {joint} (n={n}, k={k})"
            );
        }
    }

    #[test]
    fn profile_empty_network_is_zero() {
        let x = Network::zeros(4).unwrap();
        let z = labels(&[0, 0, 0, 0], 1);
        assert_eq!(log_profile_sup(&x, &z).unwrap(), 0.0);
    }

    #[test]
    fn label_permutation_invariance() {
        let x = Network::from_rows(&[
            vec![0, 2, 1, 0],
            vec![2, 0, 0, 1],
            vec![1, 0, 2, 1],
            vec![0, 1, 1, 0],
        ])
        .unwrap();
        let z = labels(&[0, 1, 2, 1], 3);
        let v = log_profile_sup(&x, &z).unwrap();
        for sigma in [[1, 2, 0], [2, 0, 1], [0, 2, 1]] {
            let zp = z.relabeled(&sigma).unwrap();
            let vp = log_profile_sup(&x, &zp).unwrap();
            assert!((v - vp).abs() < 1e-10);
        }
    }

    #[test]
    fn exhaustive_search_separates_planted_cliques() {
        // Two triangles with multiplicity-3 edges, no cross edges.
        let mut rows = vec![vec![0u64; 6]; 6];
        for &(i, j) in &[(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)] {
            rows[i][j] = 3;
            rows[j][i] = 3;
        }
        let x = Network::from_rows(&rows).unwrap();
        let mut rng = substream(5, 0);
        let res = search_profile_labels(
            &x,
            2,
            SearchStrategy::Exhaustive {
                budget: DEFAULT_ENUM_BUDGET,
            },
            &mut rng,
        )
        .unwrap();
        assert!(res.exhaustive);
        // Canonical tie-breaking puts node 0 in community 0.
        assert_eq!(res.labels.as_slice(), &[0, 0, 0, 1, 1, 1]);

        // Greedy never beats the exhaustive optimum, and usually matches it.
        let greedy = search_profile_labels(
            &x,
            2,
            SearchStrategy::Greedy {
                restarts: 8,
                max_sweeps: 50,
            },
            &mut rng,
        )
        .unwrap();
        assert!(!greedy.exhaustive);
        assert!(greedy.log_sup <= res.log_sup + 1e-9);
    }

    #[test]
    fn exhaustive_budget_enforced() {
        let x = Network::zeros(30).unwrap();
        let mut rng = substream(0, 0);
        let err =
            search_profile_labels(&x, 3, SearchStrategy::Exhaustive { budget: 1000 }, &mut rng);
        assert!(matches!(err, Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn single_community_search_is_trivial() {
        let x = Network::from_rows(&[vec![0, 1], vec![1, 0]]).unwrap();
        let mut rng = substream(2, 0);
        for strategy in [
            SearchStrategy::Exhaustive { budget: 100 },
            SearchStrategy::Greedy {
                restarts: 2,
                max_sweeps: 10,
            },
        ] {
            let res = search_profile_labels(&x, 1, strategy, &mut rng).unwrap();
            assert_eq!(res.labels.as_slice(), &[0, 0]);
        }
    }

    #[test]
    fn ascent_counters_stay_consistent() {
        let mut rng = substream(33, 0);
        for seed in 0..20u64 {
            let cfg = crate::sampler::GeneratorConfig::hierarchical(12, 3, 1.0, seed);
            let d = crate::sampler::sample_dataset(&cfg).unwrap();
            let out = greedy_candidates(&d.network, 3, 3, 50, &mut rng).unwrap();
            for o in out {
                let fresh = log_profile_sup(&d.network, &o.labels).unwrap();
                assert!(
                    (fresh - o.log_sup).abs() < 1e-9,
                    "incremental {} vs fresh {fresh}",
                    o.log_sup
                );
            }
        }
    }
}
