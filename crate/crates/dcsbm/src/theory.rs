//! Numerical verification of the analytic ingredients behind consistency of
//! the selection rule: Gamma-function inequalities, sup-vs-evidence ratio
//! bounds, weighted confusion matrices, Poisson concentration deviations,
//! and the community-merging functional whose strict decrease under merging
//! identifies the model order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::Labels;
use crate::marginal::log_abc;
use crate::network::Network;
use crate::params::ModelParams;
use crate::special::{ln_gamma, x_ln_x, LN_GAMMA_HALF};
use crate::stats::compute_stats;

/// A check holds when its margin is at least `-CHECK_TOLERANCE`.
pub const CHECK_TOLERANCE: f64 = 1e-9;

/// Outcome of one numerical check: `margin` is the bound minus the attained
/// value (log scale where applicable), so nonnegative margins mean the
/// inequality holds with room.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub holds: bool,
    pub margin: f64,
    /// Offending input, set only when the check fails.
    pub witness: Option<String>,
}

impl CheckResult {
    fn from_margin(name: impl Into<String>, margin: f64, witness: impl Fn() -> String) -> Self {
        let holds = margin >= -CHECK_TOLERANCE;
        CheckResult {
            name: name.into(),
            holds,
            margin,
            witness: if holds { None } else { Some(witness()) },
        }
    }
}

/// Gamma partition inequality: for integers `m = m_1 + ... + m_J`,
/// `prod (m_j / m)^{m_j} / prod Gamma(m_j + 1/2)
///  <= 1 / (Gamma(m + 1/2) Gamma(1/2)^{J-1})`.
///
/// Zero parts follow the `0 ln 0 = 0` convention. `J = 1` attains equality.
pub fn check_gamma_partition(parts: &[u64]) -> Result<CheckResult> {
    if parts.is_empty() {
        return Err(Error::Precondition("at least one part required".into()));
    }
    let m: u64 = parts.iter().sum();
    if m == 0 {
        return Err(Error::Precondition("parts must sum to at least 1".into()));
    }
    let j = parts.len() as f64;
    let mf = m as f64;
    let mut lhs = 0.0;
    for &p in parts {
        let pf = p as f64;
        if p > 0 {
            lhs += pf * (pf / mf).ln();
        }
        lhs -= ln_gamma(pf + 0.5);
    }
    let rhs = -ln_gamma(mf + 0.5) - (j - 1.0) * LN_GAMMA_HALF;
    Ok(CheckResult::from_margin(
        "gamma_partition",
        rhs - lhs,
        || format!("parts = {parts:?}"),
    ))
}

/// Gamma ratio bound: for `J >= 1` and `m >= max(J, 3)`,
/// `Gamma(1/2) Gamma(m + J/2) / (Gamma(J/2) Gamma(m + 1/2)) <= m^J`.
pub fn check_gamma_ratio(m: u64, j: u64) -> Result<CheckResult> {
    if j < 1 {
        return Err(Error::Precondition("J must be at least 1".into()));
    }
    if m < j.max(3) {
        return Err(Error::Precondition(format!(
            "m = {m} must be at least max(J, 3) = {}",
            j.max(3)
        )));
    }
    let mf = m as f64;
    let jf = j as f64;
    let log_ratio =
        LN_GAMMA_HALF + ln_gamma(mf + jf / 2.0) - ln_gamma(jf / 2.0) - ln_gamma(mf + 0.5);
    let margin = jf * mf.ln() - log_ratio;
    Ok(CheckResult::from_margin("gamma_ratio", margin, || {
        format!("m = {m}, J = {j}")
    }))
}

/// Logs of the sup-likelihood factors `A^`, `B^`, `C^`: the maximized
/// likelihood factors as `log sup p(x, z | theta) = -log c(x) + A^ + B^ + C^`
/// in log scale, with `0 ln 0 = 0` conventions throughout.
pub fn log_sup_parts(x: &Network, z: &Labels) -> Result<(f64, f64, f64)> {
    let stats = compute_stats(x, z)?;
    let k = z.k();
    let n = x.n() as f64;

    let mut a_hat = 0.0;
    for s in 0..k {
        for t in s..k {
            let o = stats.block_edge(s, t);
            if o > 0 {
                let of = o as f64;
                a_hat += of * (of / stats.pair_count(s, t)).ln() - of;
            }
        }
    }

    let mut b_hat = 0.0;
    for i in 0..x.n() {
        let d = stats.degrees[i];
        if d > 0 {
            let a = z.get(i);
            let df = d as f64;
            b_hat += df * (stats.sizes[a] as f64 * df / stats.block_degrees[a] as f64).ln();
        }
    }

    let mut c_hat = 0.0;
    for s in 0..k {
        let na = stats.sizes[s];
        if na > 0 {
            c_hat += na as f64 * (na as f64 / n).ln();
        }
    }

    Ok((a_hat, b_hat, c_hat))
}

/// The three sup-vs-evidence ratio checks at one `(x, z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioBoundChecks {
    /// `log(A^ / A)`; nonnegative because the sup dominates the prior
    /// average factor by factor.
    pub log_ratio_a: f64,
    pub log_ratio_b: f64,
    pub log_ratio_c: f64,
    /// `A^ / A <= (n+1)^{k(k+1)}` in log scale.
    pub bound_a: CheckResult,
    /// `B^ / B <= (n^2 ln n)^n` in log scale.
    pub bound_b: CheckResult,
    /// `C^ / C <= n^k` in log scale.
    pub bound_c: CheckResult,
}

/// Check the three ratio bounds. Requires `n >= 3` and a bounded-entry
/// network (`x[i][j] <= ln n` everywhere), which the first two bounds need.
pub fn check_ratio_bounds(x: &Network, z: &Labels) -> Result<RatioBoundChecks> {
    let n = x.n();
    if n < 3 {
        return Err(Error::Precondition(format!("need n >= 3, got {n}")));
    }
    let bound = (n as f64).ln();
    for i in 0..n {
        for j in 0..n {
            let v = x.count(i, j);
            if v as f64 > bound {
                return Err(Error::OutsideOmega { i, j, value: v });
            }
        }
    }
    let (a_hat, b_hat, c_hat) = log_sup_parts(x, z)?;
    let parts = log_abc(x, z)?;
    let k = z.k() as f64;
    let nf = n as f64;

    let log_ratio_a = a_hat - parts.a;
    let log_ratio_b = b_hat - parts.b;
    let log_ratio_c = c_hat - parts.c;

    let witness = || format!("n = {n}, k = {}, z = {:?}", z.k(), z.as_slice());
    Ok(RatioBoundChecks {
        log_ratio_a,
        log_ratio_b,
        log_ratio_c,
        bound_a: CheckResult::from_margin(
            "ratio_bound_a",
            k * (k + 1.0) * (nf + 1.0).ln() - log_ratio_a,
            witness,
        ),
        bound_b: CheckResult::from_margin(
            "ratio_bound_b",
            nf * (2.0 * nf.ln() + nf.ln().ln()) - log_ratio_b,
            witness,
        ),
        bound_c: CheckResult::from_margin("ratio_bound_c", k * nf.ln() - log_ratio_c, witness),
    })
}

/// Weighted confusion matrix between a candidate assignment and a reference:
/// `Q[a][a'] = (1/n) sum_i w_i 1{z_bar_i = a, z0_i = a'}`, returned row-major
/// `k x k0` where `k = z_bar.k()` and `k0 = z0.k()`.
///
/// With weights satisfying the per-community constraint, `||Q||_1 = 1` and
/// the column sums recover `n_{a'}(z0) / n`.
pub fn q_matrix(z_bar: &Labels, z0: &Labels, weights: &[f64]) -> Result<Vec<f64>> {
    let n = z_bar.len();
    if z0.len() != n || weights.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "lengths differ: candidate {n}, reference {}, weights {}",
            z0.len(),
            weights.len()
        )));
    }
    let k = z_bar.k();
    let k0 = z0.k();
    let mut q = vec![0.0f64; k * k0];
    for i in 0..n {
        q[z_bar.get(i) * k0 + z0.get(i)] += weights[i];
    }
    let nf = n as f64;
    for v in &mut q {
        *v /= nf;
    }
    Ok(q)
}

/// The merging functional
/// `F(pi, lam) = (1/2) sum_{a,b} pi_a pi_b L_a L_b phi(lam_ab / (L_a L_b))`
/// with `L = lam pi` and `phi(u) = u ln u` (`phi(0) = 0`).
///
/// Vanishing coefficients (empty merged communities) contribute zero.
pub fn merging_functional(pi: &[f64], lam: &[f64]) -> Result<f64> {
    let k = pi.len();
    if lam.len() != k * k {
        return Err(Error::DimensionMismatch(format!(
            "lambda has {} entries, expected {}",
            lam.len(),
            k * k
        )));
    }
    let mut l = vec![0.0f64; k];
    for a in 0..k {
        for b in 0..k {
            l[a] += lam[a * k + b] * pi[b];
        }
    }
    let mut f = 0.0;
    for a in 0..k {
        for b in 0..k {
            let coef = pi[a] * pi[b] * l[a] * l[b];
            if coef == 0.0 {
                continue;
            }
            f += 0.5 * coef * x_ln_x(lam[a * k + b] / (l[a] * l[b]));
        }
    }
    Ok(f)
}

/// A merge of `k0` communities into `k`: `h(a')` names the target of source
/// community `a'`. The induced vertex matrix `R` has `R[h(a'), a'] = pi_{a'}`
/// as its only nonzero entry per column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeMap {
    map: Vec<usize>,
    k: usize,
}

impl MergeMap {
    pub fn new(map: Vec<usize>, k: usize) -> Result<Self> {
        if map.is_empty() || k == 0 {
            return Err(Error::InvalidParameter(
                "merge map needs k0 >= 1 and k >= 1".into(),
            ));
        }
        for &t in &map {
            if t >= k {
                return Err(Error::LabelOutOfRange { label: t, k });
            }
        }
        Ok(MergeMap { map, k })
    }

    pub fn identity(k: usize) -> Result<Self> {
        Self::new((0..k).collect(), k)
    }

    pub fn k0(&self) -> usize {
        self.map.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    /// The `k x k0` vertex matrix built from `pi`.
    pub fn vertex_matrix(&self, pi: &[f64]) -> Result<Vec<f64>> {
        if pi.len() != self.k0() {
            return Err(Error::DimensionMismatch(format!(
                "pi has {} entries, merge map has k0 = {}",
                pi.len(),
                self.k0()
            )));
        }
        let mut r = vec![0.0f64; self.k * self.k0()];
        for (a0, &target) in self.map.iter().enumerate() {
            r[target * self.k0() + a0] = pi[a0];
        }
        Ok(r)
    }
}

/// Merge `(pi, lam)` through `h`: `pi*_a` sums the merged masses and
/// `lam*_ab` is the pi-weighted block average
/// `[R lam R^T]_ab / (pi*_a pi*_b)`. A bijective `h` is a relabeling.
pub fn merged_params(h: &MergeMap, pi: &[f64], lam: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let k0 = h.k0();
    if pi.len() != k0 {
        return Err(Error::DimensionMismatch(format!(
            "pi has {} entries, merge map has k0 = {k0}",
            pi.len()
        )));
    }
    if lam.len() != k0 * k0 {
        return Err(Error::DimensionMismatch(format!(
            "lambda has {} entries, expected {}",
            lam.len(),
            k0 * k0
        )));
    }
    let k = h.k();
    let mut pi_star = vec![0.0f64; k];
    for (a0, &t) in h.map().iter().enumerate() {
        pi_star[t] += pi[a0];
    }
    let mut num = vec![0.0f64; k * k];
    for a0 in 0..k0 {
        for b0 in 0..k0 {
            num[h.map()[a0] * k + h.map()[b0]] += pi[a0] * pi[b0] * lam[a0 * k0 + b0];
        }
    }
    let mut lam_star = vec![0.0f64; k * k];
    for a in 0..k {
        for b in 0..k {
            let mass = pi_star[a] * pi_star[b];
            if mass > 0.0 {
                lam_star[a * k + b] = num[a * k + b] / mass;
            }
        }
    }
    Ok((pi_star, lam_star))
}

/// Identifiability gap at order `k < k0`:
/// `F(pi, lam) - max_h F(merged through h)` over all `k^{k0}` merge maps.
///
/// Strictly positive when no two columns of `lam` are proportional; zero
/// exactly at proportional columns. Non-surjective maps merge further and
/// only lower `F`, so including them is safe.
pub fn identifiability_gap(pi: &[f64], lam: &[f64], k: usize) -> Result<f64> {
    let k0 = pi.len();
    if k == 0 {
        return Err(Error::Precondition("k must be at least 1".into()));
    }
    if k >= k0 {
        return Err(Error::Precondition(format!(
            "need k < k0, got k = {k}, k0 = {k0}"
        )));
    }
    let base = merging_functional(pi, lam)?;
    let mut best_merged = f64::NEG_INFINITY;
    let mut map = vec![0usize; k0];
    loop {
        let h = MergeMap::new(map.clone(), k)?;
        let (pi_star, lam_star) = merged_params(&h, pi, lam)?;
        let f = merging_functional(&pi_star, &lam_star)?;
        if f > best_merged {
            best_merged = f;
        }
        // odometer over [k]^{k0}
        let mut pos = 0;
        loop {
            if pos == k0 {
                return Ok(base - best_merged);
            }
            map[pos] += 1;
            if map[pos] < k {
                break;
            }
            map[pos] = 0;
            pos += 1;
        }
    }
}

/// Deviations between scaled block counters of `(x, z_bar)` and their
/// Poisson means under the truth `(z0, params)`:
/// `dev_o[a][b] = |o~_ab / (rho n^2) - [Q lam~ Q^T]_ab|` and
/// `dev_d[a] = |d^t_a / (rho n^2) - [Q lam~ Q^T 1]_a|`, with `Q` built from
/// the generating weights.
///
/// These are trend quantities (they shrink in `n` under the model), not
/// asserted bounds.
pub fn concentration_deviation(
    x: &Network,
    z0: &Labels,
    z_bar: &Labels,
    params: &ModelParams,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = x.n();
    if z0.len() != n || z_bar.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "labels cover {} / {} nodes, network has {n}",
            z0.len(),
            z_bar.len()
        )));
    }
    if params.k() != z0.k() {
        return Err(Error::DimensionMismatch(format!(
            "params have k = {}, reference labels have k = {}",
            params.k(),
            z0.k()
        )));
    }
    if params.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "params cover {} nodes, network has {n}",
            params.n()
        )));
    }
    let k = z_bar.k();
    let k0 = z0.k();
    let q = q_matrix(z_bar, z0, params.weights())?;

    // M = Q lam~ Q^T, k x k.
    let mut ql = vec![0.0f64; k * k0];
    for a in 0..k {
        for b0 in 0..k0 {
            let mut acc = 0.0;
            for a0 in 0..k0 {
                acc += q[a * k0 + a0] * params.lambda_tilde(a0, b0);
            }
            ql[a * k0 + b0] = acc;
        }
    }
    let mut m = vec![0.0f64; k * k];
    for a in 0..k {
        for b in 0..k {
            let mut acc = 0.0;
            for b0 in 0..k0 {
                acc += ql[a * k0 + b0] * q[b * k0 + b0];
            }
            m[a * k + b] = acc;
        }
    }

    let stats = compute_stats(x, z_bar)?;
    let scale = params.rho() * (n as f64) * (n as f64);
    let mut dev_o = vec![0.0f64; k * k];
    let mut dev_d = vec![0.0f64; k];
    for a in 0..k {
        let mut row_mean = 0.0;
        for b in 0..k {
            dev_o[a * k + b] = (stats.sym_block_edge(a, b) as f64 / scale - m[a * k + b]).abs();
            row_mean += m[a * k + b];
        }
        dev_d[a] = (stats.block_degrees[a] as f64 / scale - row_mean).abs();
    }
    Ok((dev_o, dev_d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::likelihood::{log_c, log_profile_sup};
    use crate::sampler::{sample_dataset, substream, GeneratorConfig};
    use rand::Rng;

    fn labels(z: &[usize], k: usize) -> Labels {
        Labels::new(z.to_vec(), k).unwrap()
    }

    #[test]
    fn gamma_partition_examples() {
        // m = (1, 1): LHS = 1/pi, RHS = 4/(3 pi).
        let r = check_gamma_partition(&[1, 1]).unwrap();
        assert!(r.holds);
        assert!((r.margin - (4f64 / 3.0).ln()).abs() < 1e-12);

        // Single part: equality.
        for m in [1u64, 2, 7, 50] {
            let r = check_gamma_partition(&[m]).unwrap();
            assert!(r.holds);
            assert!(r.margin.abs() < 1e-12, "J = 1 margin {}", r.margin);
        }

        // Zero parts scale both sides identically.
        let with_zero = check_gamma_partition(&[3, 0, 2]).unwrap();
        let without = check_gamma_partition(&[3, 2]).unwrap();
        assert!((with_zero.margin - without.margin).abs() < 1e-12);

        assert!(check_gamma_partition(&[]).is_err());
        assert!(check_gamma_partition(&[0, 0]).is_err());
    }

    #[test]
    fn gamma_partition_random_sweep() {
        let mut rng = substream(500, 0);
        for _ in 0..1000 {
            let j = rng.random_range(1..=10usize);
            let parts: Vec<u64> = (0..j).map(|_| rng.random_range(0..=50u64)).collect();
            if parts.iter().sum::<u64>() == 0 {
                continue;
            }
            let r = check_gamma_partition(&parts).unwrap();
            assert!(r.holds, "violated at {parts:?}, margin {}", r.margin);
        }
    }

    #[test]
    fn gamma_ratio_examples() {
        // J = 1: ratio is exactly 1, margin ln m.
        let r = check_gamma_ratio(3, 1).unwrap();
        assert!((r.margin - 3f64.ln()).abs() < 1e-12);

        // m = 3, J = 2: ratio = 16/5.
        let r = check_gamma_ratio(3, 2).unwrap();
        assert!((r.margin - (2.0 * 3f64.ln() - (16f64 / 5.0).ln())).abs() < 1e-12);

        assert!(check_gamma_ratio(2, 1).is_err());
        assert!(check_gamma_ratio(4, 5).is_err());
        assert!(check_gamma_ratio(3, 0).is_err());
    }

    #[test]
    fn gamma_ratio_full_sweep() {
        for m in 3..=200u64 {
            for j in 1..=m {
                let r = check_gamma_ratio(m, j).unwrap();
                assert!(r.holds, "violated at m = {m}, J = {j}, margin {}", r.margin);
            }
        }
    }

    #[test]
    fn sup_parts_reassemble_profile_likelihood() {
        for seed in 0..30u64 {
            let cfg = GeneratorConfig::hierarchical(7, 3, 1.0, seed);
            let d = sample_dataset(&cfg).unwrap();
            let mut rng = substream(seed, 9);
            let k = 1 + (seed as usize % 3);
            let z = Labels::new((0..7).map(|_| rng.random_range(0..k)).collect(), k).unwrap();
            let (a, b, c) = log_sup_parts(&d.network, &z).unwrap();
            let direct = log_profile_sup(&d.network, &z).unwrap();
            let assembled = -log_c(&d.network) + a + b + c;
            assert!(
                (assembled - direct).abs() < 1e-9,
                "assembled {assembled} vs profile {direct}"
            );
        }
    }

    #[test]
    fn ratio_bounds_preconditions() {
        let small = Network::zeros(2).unwrap();
        assert!(check_ratio_bounds(&small, &labels(&[0, 0], 1)).is_err());

        // Entry 2 > ln 3.
        let outside = Network::from_rows(&[vec![0, 2, 0], vec![2, 0, 0], vec![0, 0, 0]]).unwrap();
        assert!(matches!(
            check_ratio_bounds(&outside, &labels(&[0, 0, 0], 1)),
            Err(Error::OutsideOmega { .. })
        ));
    }

    #[test]
    fn ratio_bounds_hold_and_ratios_dominate_one() {
        let mut rng = substream(600, 0);
        for _ in 0..300 {
            let n = rng.random_range(3..=8usize);
            let k = rng.random_range(1..=3usize);
            let cap = (n as f64).ln().floor() as u64;
            let mut rows = vec![vec![0u64; n]; n];
            for i in 0..n {
                let max_diag = if cap >= 2 { 2 } else { 0 };
                rows[i][i] = if max_diag > 0 && rng.random::<f64>() < 0.3 {
                    2
                } else {
                    0
                };
                for j in (i + 1)..n {
                    let c = rng.random_range(0..=cap);
                    rows[i][j] = c;
                    rows[j][i] = c;
                }
            }
            let x = Network::from_rows(&rows).unwrap();
            let z = Labels::new((0..n).map(|_| rng.random_range(0..k)).collect(), k).unwrap();
            let checks = check_ratio_bounds(&x, &z).unwrap();
            assert!(checks.bound_a.holds, "{:?}", checks.bound_a);
            assert!(checks.bound_b.holds, "{:?}", checks.bound_b);
            assert!(checks.bound_c.holds, "{:?}", checks.bound_c);
            assert!(checks.log_ratio_a >= -CHECK_TOLERANCE);
            assert!(checks.log_ratio_b >= -CHECK_TOLERANCE);
            assert!(checks.log_ratio_c >= -CHECK_TOLERANCE);
        }
    }

    #[test]
    fn q_matrix_examples() {
        // z_bar = z0, unit weights: diagonal confusion matrix.
        let z = labels(&[0, 0, 1, 1, 1], 2);
        let q = q_matrix(&z, &z, &[1.0; 5]).unwrap();
        assert_eq!(q, vec![0.4, 0.0, 0.0, 0.6]);

        // Entries always sum to one for constraint-satisfying weights.
        let z_bar = labels(&[0, 1, 0, 1, 0], 2);
        let q2 = q_matrix(&z_bar, &z, &[1.0; 5]).unwrap();
        assert!((q2.iter().sum::<f64>() - 1.0).abs() < 1e-12);

        // Constant candidate: the single nonzero row carries n_{a'}/n.
        let all_one = labels(&[0; 5], 1);
        let q3 = q_matrix(&all_one, &z, &[1.0; 5]).unwrap();
        assert_eq!(q3, vec![0.4, 0.6]);

        assert!(q_matrix(&z, &z, &[1.0; 4]).is_err());
    }

    #[test]
    fn merging_functional_closed_forms() {
        // k = 1, rate 1: phi(1) = 0.
        assert_eq!(merging_functional(&[1.0], &[1.0]).unwrap(), 0.0);

        // k = 1, rate c: F = -c ln(c) / 2.
        for c in [0.3, 2.0, 5.0] {
            let f = merging_functional(&[1.0], &[c]).unwrap();
            assert!((f - (-0.5 * c * c.ln())).abs() < 1e-12);
        }

        // Constant matrix: same value as the fully merged model.
        let f = merging_functional(&[0.3, 0.7], &[2.0, 2.0, 2.0, 2.0]).unwrap();
        assert!((f - (-0.5 * 2.0 * 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn merging_functional_permutation_invariance() {
        let pi = [0.2, 0.3, 0.5];
        let lam = [2.0, 1.0, 0.5, 1.0, 3.0, 0.7, 0.5, 0.7, 1.5];
        let f = merging_functional(&pi, &lam).unwrap();
        // permute (0 1 2) -> (2 0 1)
        let perm = [2usize, 0, 1];
        let mut pi_p = [0.0; 3];
        let mut lam_p = [0.0; 9];
        for a in 0..3 {
            pi_p[perm[a]] = pi[a];
            for b in 0..3 {
                lam_p[perm[a] * 3 + perm[b]] = lam[a * 3 + b];
            }
        }
        let fp = merging_functional(&pi_p, &lam_p).unwrap();
        assert!((f - fp).abs() < 1e-12);
    }

    #[test]
    fn merged_params_examples() {
        // Identity map is a no-op.
        let pi = [0.4, 0.6];
        let lam = [2.0, 1.0, 1.0, 3.0];
        let id = MergeMap::identity(2).unwrap();
        let (pi_star, lam_star) = merged_params(&id, &pi, &lam).unwrap();
        assert_eq!(pi_star, vec![0.4, 0.6]);
        for (got, want) in lam_star.iter().zip([2.0, 1.0, 1.0, 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }

        // Merge two equal halves of [[2,1],[1,2]]: weighted average 1.5.
        let h = MergeMap::new(vec![0, 0], 1).unwrap();
        let (pi_m, lam_m) = merged_params(&h, &[0.5, 0.5], &[2.0, 1.0, 1.0, 2.0]).unwrap();
        assert_eq!(pi_m, vec![1.0]);
        assert!((lam_m[0] - 1.5).abs() < 1e-12);

        // Vertex matrix has one entry per column, columns reproduce pi.
        let r = h.vertex_matrix(&[0.5, 0.5]).unwrap();
        assert_eq!(r, vec![0.5, 0.5]);
        assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn merging_is_associative() {
        let pi = [0.2, 0.3, 0.4, 0.1];
        let lam = [
            2.0, 1.0, 0.5, 0.3, 1.0, 3.0, 0.7, 0.2, 0.5, 0.7, 1.5, 0.9, 0.3, 0.2, 0.9, 2.5,
        ];
        // h1: 4 -> 3 (merge communities 2 and 3), h2: 3 -> 2 (merge 0 and 1).
        let h1 = MergeMap::new(vec![0, 1, 2, 2], 3).unwrap();
        let h2 = MergeMap::new(vec![0, 0, 1], 2).unwrap();
        let (pi1, lam1) = merged_params(&h1, &pi, &lam).unwrap();
        let (pi_seq, lam_seq) = merged_params(&h2, &pi1, &lam1).unwrap();

        let composed: Vec<usize> = h1.map().iter().map(|&a| h2.map()[a]).collect();
        let hc = MergeMap::new(composed, 2).unwrap();
        let (pi_c, lam_c) = merged_params(&hc, &pi, &lam).unwrap();

        for (a, b) in pi_seq.iter().zip(&pi_c) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in lam_seq.iter().zip(&lam_c) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn identifiability_gap_cases() {
        // Distinct columns: strictly positive gap.
        let gap = identifiability_gap(&[0.5, 0.5], &[2.0, 1.0, 1.0, 2.0], 1).unwrap();
        assert!(gap > 1e-6, "gap {gap}");

        // Proportional (rank-1) columns: zero gap.
        let flat = identifiability_gap(&[0.5, 0.5], &[2.0, 2.0, 2.0, 2.0], 1).unwrap();
        assert!(flat.abs() < 1e-10, "gap {flat}");

        // Scaling preserves positivity.
        for c in [0.1, 10.0] {
            let lam: Vec<f64> = [2.0, 1.0, 1.0, 2.0].iter().map(|v| v * c).collect();
            let g = identifiability_gap(&[0.5, 0.5], &lam, 1).unwrap();
            assert!(g > 1e-6, "scaled gap {g} at c = {c}");
        }

        // Gap is never negative, even for awkward inputs.
        let mut rng = substream(700, 0);
        for _ in 0..50 {
            let k0 = rng.random_range(2..=3usize);
            let pi: Vec<f64> = {
                let raw: Vec<f64> = (0..k0).map(|_| rng.random::<f64>() + 0.05).collect();
                let s: f64 = raw.iter().sum();
                raw.iter().map(|v| v / s).collect()
            };
            let mut lam = vec![0.0; k0 * k0];
            for a in 0..k0 {
                for b in a..k0 {
                    let v = rng.random::<f64>() * 3.0 + 0.1;
                    lam[a * k0 + b] = v;
                    lam[b * k0 + a] = v;
                }
            }
            for k in 1..k0 {
                let g = identifiability_gap(&pi, &lam, k).unwrap();
                assert!(g >= -1e-10, "negative gap {g}");
            }
        }

        assert!(identifiability_gap(&[0.5, 0.5], &[1.0; 4], 2).is_err());
        assert!(identifiability_gap(&[0.5, 0.5], &[1.0; 4], 0).is_err());
    }

    #[test]
    fn concentration_deviation_empty_network() {
        // All-zero network: deviations equal the Q lam Q^T terms exactly.
        let x = Network::zeros(4).unwrap();
        let z0 = labels(&[0, 0, 1, 1], 2);
        let z_bar = labels(&[0, 1, 0, 1], 2);
        let params = ModelParams::new(
            vec![0.5, 0.5],
            &[vec![2.0, 1.0], vec![1.0, 2.0]],
            1.0,
            vec![1.0; 4],
        )
        .unwrap();
        let (dev_o, dev_d) = concentration_deviation(&x, &z0, &z_bar, &params).unwrap();

        let q = q_matrix(&z_bar, &z0, params.weights()).unwrap();
        // Q = [[.25, .25], [.25, .25]]; M = Q lam Q^T has all entries 1.5/4.
        assert!(q.iter().all(|&v| (v - 0.25).abs() < 1e-12));
        for v in &dev_o {
            assert!((v - 0.375).abs() < 1e-12);
        }
        for v in &dev_d {
            assert!((v - 0.75).abs() < 1e-12);
        }

        // Determinism.
        let again = concentration_deviation(&x, &z0, &z_bar, &params).unwrap();
        assert_eq!(again.0, dev_o);
        assert_eq!(again.1, dev_d);
    }

    #[test]
    fn concentration_is_centered_at_truth_in_expectation() {
        // Single draw sanity: deviations at the true labels are small
        // relative to the rate scale for a moderately dense instance.
        let cfg = GeneratorConfig::fixed(
            60,
            1.0,
            31,
            vec![0.5, 0.5],
            vec![vec![4.0, 1.0], vec![1.0, 4.0]],
            crate::sampler::WeightMode::Ones,
        );
        let d = sample_dataset(&cfg).unwrap();
        let (dev_o, _dev_d) =
            concentration_deviation(&d.network, &d.labels, &d.labels, &d.params).unwrap();
        for v in dev_o {
            assert!(v < 0.5, "deviation {v} unexpectedly large");
        }
    }
}
