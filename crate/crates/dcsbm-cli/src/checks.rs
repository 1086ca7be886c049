//! Seeded sweeps over the numerical checks, backing the `check` subcommand.

use rand::Rng;

use dcsbm::marginal::dominance_margin;
use dcsbm::sampler::{sample_weights, substream, StreamRng};
use dcsbm::theory::{
    check_gamma_partition, check_gamma_ratio, check_ratio_bounds, identifiability_gap,
    merged_params, merging_functional, q_matrix, MergeMap,
};
use dcsbm::{Labels, Network};

/// One summary line of a sweep.
#[derive(Debug, Clone)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckLine {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        CheckLine {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

/// Random network inside the bounded-entry event: every entry at most
/// `ln n`, diagonals even.
pub fn random_omega_network<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Network {
    let cap = (n as f64).ln().floor() as u64;
    let mut counts = vec![0u64; n * n];
    for i in 0..n {
        if cap >= 2 && rng.random::<f64>() < 0.3 {
            counts[i * n + i] = 2;
        }
        for j in (i + 1)..n {
            let c = rng.random_range(0..=cap);
            counts[i * n + j] = c;
            counts[j * n + i] = c;
        }
    }
    Network::new(n, counts).expect("constructed symmetric with even diagonal")
}

/// Random labels over `k`, empty communities allowed.
pub fn random_labels<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Labels {
    Labels::new((0..n).map(|_| rng.random_range(0..k)).collect(), k).expect("in range")
}

/// Probability vector with all entries at least `floor`.
pub fn random_pi_with_floor<R: Rng + ?Sized>(k: usize, floor: f64, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-3).collect();
    let sum: f64 = raw.iter().sum();
    let slack = 1.0 - floor * k as f64;
    raw.into_iter().map(|v| floor + slack * v / sum).collect()
}

fn column_cosine_distance(lam: &[f64], k: usize, a: usize, b: usize) -> f64 {
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for r in 0..k {
        let va = lam[r * k + a];
        let vb = lam[r * k + b];
        dot += va * vb;
        na += va * va;
        nb += vb * vb;
    }
    1.0 - dot / (na.sqrt() * nb.sqrt())
}

/// Random symmetric positive rate matrix whose columns are pairwise at
/// least `min_cos_dist` apart in cosine distance.
pub fn random_separated_lambda<R: Rng + ?Sized>(
    k: usize,
    min_cos_dist: f64,
    rng: &mut R,
) -> Vec<f64> {
    loop {
        let mut lam = vec![0.0f64; k * k];
        for a in 0..k {
            for b in a..k {
                let v = 0.2 + rng.random::<f64>() * 2.8;
                lam[a * k + b] = v;
                lam[b * k + a] = v;
            }
        }
        let mut ok = true;
        'outer: for a in 0..k {
            for b in (a + 1)..k {
                if column_cosine_distance(&lam, k, a, b) < min_cos_dist {
                    ok = false;
                    break 'outer;
                }
            }
        }
        if ok {
            return lam;
        }
    }
}

/// Symmetric positive matrix whose last two columns are proportional with
/// factor `c`, the equality case of the merging inequality.
pub fn proportional_column_lambda<R: Rng + ?Sized>(k0: usize, c: f64, rng: &mut R) -> Vec<f64> {
    assert!(k0 >= 2);
    let mut lam = vec![0.0f64; k0 * k0];
    // Free symmetric block among the first k0 - 1 communities.
    for a in 0..k0 - 1 {
        for b in a..k0 - 1 {
            let v = 0.2 + rng.random::<f64>() * 2.8;
            lam[a * k0 + b] = v;
            lam[b * k0 + a] = v;
        }
    }
    // Column k0-1 = c * column k0-2, kept symmetric.
    for a in 0..k0 - 1 {
        let v = c * lam[a * k0 + (k0 - 2)];
        lam[a * k0 + (k0 - 1)] = v;
        lam[(k0 - 1) * k0 + a] = v;
    }
    lam[(k0 - 1) * k0 + (k0 - 1)] = c * lam[(k0 - 2) * k0 + (k0 - 1)];
    lam
}

fn gamma_partition_sweep(rng: &mut StreamRng) -> CheckLine {
    let mut min_margin = f64::INFINITY;
    let mut failures = 0u32;
    for _ in 0..1000 {
        let j = rng.random_range(1..=10usize);
        let parts: Vec<u64> = (0..j).map(|_| rng.random_range(0..=50u64)).collect();
        if parts.iter().sum::<u64>() == 0 {
            continue;
        }
        let r = check_gamma_partition(&parts).expect("preconditions satisfied");
        min_margin = min_margin.min(r.margin);
        failures += u32::from(!r.holds);
    }
    let mut max_equality_gap = 0.0f64;
    for m in 1..=50u64 {
        let r = check_gamma_partition(&[m]).expect("single part");
        max_equality_gap = max_equality_gap.max(r.margin.abs());
    }
    let passed = failures == 0 && max_equality_gap <= 1e-12;
    CheckLine::new(
        "gamma_partition",
        passed,
        format!("min margin {min_margin:.3e}, J=1 equality gap {max_equality_gap:.3e}"),
    )
}

fn gamma_ratio_sweep() -> CheckLine {
    let mut min_margin = f64::INFINITY;
    let mut failures = 0u32;
    for m in 3..=200u64 {
        for j in 1..=m {
            let r = check_gamma_ratio(m, j).expect("preconditions satisfied");
            min_margin = min_margin.min(r.margin);
            failures += u32::from(!r.holds);
        }
    }
    CheckLine::new(
        "gamma_ratio",
        failures == 0,
        format!("min margin {min_margin:.3e}"),
    )
}

fn ratio_bounds_sweep(rng: &mut StreamRng) -> CheckLine {
    let mut min_bound_margin = f64::INFINITY;
    let mut min_ratio = f64::INFINITY;
    let mut failures = 0u32;
    for _ in 0..1000 {
        let n = rng.random_range(3..=8usize);
        let k = rng.random_range(1..=3usize);
        let x = random_omega_network(n, rng);
        let z = random_labels(n, k, rng);
        let checks = check_ratio_bounds(&x, &z).expect("x is inside the bounded event");
        for b in [&checks.bound_a, &checks.bound_b, &checks.bound_c] {
            min_bound_margin = min_bound_margin.min(b.margin);
            failures += u32::from(!b.holds);
        }
        for r in [checks.log_ratio_a, checks.log_ratio_b, checks.log_ratio_c] {
            min_ratio = min_ratio.min(r);
            failures += u32::from(r < -1e-9);
        }
    }
    CheckLine::new(
        "ratio_bounds",
        failures == 0,
        format!("min bound margin {min_bound_margin:.3e}, min log-ratio {min_ratio:.3e}"),
    )
}

fn dominance_sweep(rng: &mut StreamRng) -> CheckLine {
    let mut min_margin = f64::INFINITY;
    let mut failures = 0u32;
    for _ in 0..500 {
        let n = rng.random_range(2..=8usize);
        let k = rng.random_range(1..=3usize);
        let x = random_omega_network(n, rng);
        let z = random_labels(n, k, rng);
        let margin = dominance_margin(&x, &z).expect("consistent shapes");
        min_margin = min_margin.min(margin);
        failures += u32::from(margin < -1e-9);
    }
    CheckLine::new(
        "sup_dominates_evidence_term",
        failures == 0,
        format!("min margin {min_margin:.3e}"),
    )
}

fn q_matrix_sweep(rng: &mut StreamRng) -> CheckLine {
    let mut max_err = 0.0f64;
    for _ in 0..200 {
        let n = rng.random_range(2..=20usize);
        let k0 = rng.random_range(1..=3usize);
        let k = rng.random_range(1..=3usize);
        let z0 = random_labels(n, k0, rng);
        let z_bar = random_labels(n, k, rng);
        let weights = sample_weights(&z0, rng);
        let q = q_matrix(&z_bar, &z0, &weights).expect("consistent shapes");
        max_err = max_err.max((q.iter().sum::<f64>() - 1.0).abs());

        // Column sums recover the weighted reference sizes.
        let sizes = z0.community_sizes();
        for a0 in 0..k0 {
            let col: f64 = (0..k).map(|a| q[a * k0 + a0]).sum();
            max_err = max_err.max((col - sizes[a0] as f64 / n as f64).abs());
        }
    }
    CheckLine::new(
        "q_matrix_normalization",
        max_err <= 1e-12,
        format!("max error {max_err:.3e}"),
    )
}

fn identifiability_sweep(rng: &mut StreamRng) -> CheckLine {
    let mut min_gap = f64::INFINITY;
    let mut max_equality_gap = 0.0f64;
    let mut failures = 0u32;
    for _ in 0..30 {
        let k0 = rng.random_range(2..=3usize);
        let pi = random_pi_with_floor(k0, 0.1, rng);
        let lam = random_separated_lambda(k0, 0.05, rng);
        let gap = identifiability_gap(&pi, &lam, k0 - 1).expect("k < k0");
        min_gap = min_gap.min(gap);
        failures += u32::from(gap <= 1e-6);
    }
    for _ in 0..10 {
        let k0 = rng.random_range(2..=3usize);
        let pi = random_pi_with_floor(k0, 0.1, rng);
        let c = 0.5 + rng.random::<f64>() * 2.0;
        let lam = proportional_column_lambda(k0, c, rng);
        let gap = identifiability_gap(&pi, &lam, k0 - 1).expect("k < k0");
        max_equality_gap = max_equality_gap.max(gap.abs());
        failures += u32::from(gap.abs() > 1e-10);
    }
    CheckLine::new(
        "identifiability_gap",
        failures == 0,
        format!("min separated gap {min_gap:.3e}, max proportional |gap| {max_equality_gap:.3e}"),
    )
}

fn merge_associativity_sweep(rng: &mut StreamRng) -> CheckLine {
    let mut max_err = 0.0f64;
    for _ in 0..100 {
        let k0 = rng.random_range(3..=4usize);
        let mid = rng.random_range(2..k0);
        let last = rng.random_range(1..=mid);
        let pi = random_pi_with_floor(k0, 0.05, rng);
        let lam = random_separated_lambda(k0, 0.0, rng);
        let h1 = MergeMap::new((0..k0).map(|_| rng.random_range(0..mid)).collect(), mid).unwrap();
        let h2 =
            MergeMap::new((0..mid).map(|_| rng.random_range(0..last)).collect(), last).unwrap();

        let (pi1, lam1) = merged_params(&h1, &pi, &lam).unwrap();
        let (pi_seq, lam_seq) = merged_params(&h2, &pi1, &lam1).unwrap();
        let composed: Vec<usize> = h1.map().iter().map(|&a| h2.map()[a]).collect();
        let hc = MergeMap::new(composed, last).unwrap();
        let (pi_c, lam_c) = merged_params(&hc, &pi, &lam).unwrap();

        for (a, b) in pi_seq.iter().zip(&pi_c) {
            max_err = max_err.max((a - b).abs());
        }
        for (a, b) in lam_seq.iter().zip(&lam_c) {
            max_err = max_err.max((a - b).abs());
        }
        // Merging can only lower the functional.
        let f0 = merging_functional(&pi, &lam).unwrap();
        let f1 = merging_functional(&pi_seq, &lam_seq).unwrap();
        max_err = max_err.max((f1 - f0).max(0.0));
    }
    CheckLine::new(
        "merge_associativity",
        max_err <= 1e-12,
        format!("max error {max_err:.3e}"),
    )
}

/// Run every sweep with substreams of `seed`.
pub fn run_all_checks(seed: u64) -> Vec<CheckLine> {
    vec![
        gamma_partition_sweep(&mut substream(seed, 1)),
        gamma_ratio_sweep(),
        ratio_bounds_sweep(&mut substream(seed, 2)),
        dominance_sweep(&mut substream(seed, 3)),
        q_matrix_sweep(&mut substream(seed, 4)),
        identifiability_sweep(&mut substream(seed, 5)),
        merge_associativity_sweep(&mut substream(seed, 6)),
    ]
}
