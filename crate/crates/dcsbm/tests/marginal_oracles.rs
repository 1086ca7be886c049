//! Evidence oracles: brute-force label sums, Monte Carlo prior averaging,
//! and the sup-vs-evidence comparisons, all against the closed-form backend.

use rand::Rng;

use dcsbm::likelihood::{log_c, log_conditional, log_profile_sup, SearchStrategy};
use dcsbm::marginal::{
    log_abc, log_marginal_bracket, log_marginal_exact, log_profile_sup_sum, EvidenceValue,
};
use dcsbm::sampler::{sample_dataset, sample_params, substream, GeneratorConfig};
use dcsbm::{Labels, Network};

/// Visit all of [k]^n with a plain odometer, independent of the library's
/// enumeration machinery.
fn for_each_labeling_odometer(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    let mut z = vec![0usize; n];
    loop {
        visit(&z);
        let mut pos = 0;
        loop {
            if pos == n {
                return;
            }
            z[pos] += 1;
            if z[pos] < k {
                break;
            }
            z[pos] = 0;
            pos += 1;
        }
    }
}

#[test]
fn exact_evidence_matches_test_side_brute_force() {
    // Independent route: sum exp(log A + log B + log C) directly over the
    // odometer, using only the public per-labeling factor evaluation.
    for seed in 0..6u64 {
        let n = 2 + seed as usize % 4;
        let cfg = GeneratorConfig::hierarchical(n, 2, 1.0, 40 + seed);
        let x = sample_dataset(&cfg).unwrap().network;
        for k in 1..=2usize {
            let mut terms: Vec<f64> = Vec::new();
            for_each_labeling_odometer(n, k, |z| {
                let labels = Labels::new(z.to_vec(), k).unwrap();
                terms.push(log_abc(&x, &labels).unwrap().total());
            });
            let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let sum: f64 = terms.iter().map(|t| (t - max).exp()).sum();
            let brute = max + sum.ln() - log_c(&x);
            let fast = log_marginal_exact(&x, k, 10_000_000).unwrap().score();
            assert!(
                (brute - fast).abs() < 1e-9,
                "brute {brute} vs backend {fast}"
            );
        }
    }
}

#[test]
fn evidence_matches_monte_carlo_prior_average() {
    // Smaller sibling of the acceptance-scale check: 2 instances, 20k prior
    // draws, 4 standard errors.
    for (instance, seed) in [3u64, 7].iter().enumerate() {
        let n = 3;
        let gen = GeneratorConfig::hierarchical(n, 2, 1.0, 60 + seed);
        let x = sample_dataset(&gen).unwrap().network;
        let k = 2;
        let exact = log_marginal_exact(&x, k, 10_000_000).unwrap().score();

        let draws = 20_000;
        let mut rng = substream(900 + seed, 0);
        let prior_cfg = GeneratorConfig::hierarchical(n, k, 1.0, 0);
        let mut logs = Vec::with_capacity(draws);
        for _ in 0..draws {
            let (params, z) = sample_params(&prior_cfg, &mut rng).unwrap();
            logs.push(log_conditional(&x, &z, &params).unwrap());
        }
        let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let scaled: Vec<f64> = logs.iter().map(|v| (v - max).exp()).collect();
        let mean: f64 = scaled.iter().sum::<f64>() / draws as f64;
        let var: f64 =
            scaled.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (draws - 1) as f64;
        let se = (var / draws as f64).sqrt();
        let exact_scaled = (exact - max).exp();
        assert!(
            (exact_scaled - mean).abs() <= 4.0 * se,
            "instance {instance}: exact {exact_scaled} vs MC {mean} (se {se})"
        );
    }
}

#[test]
fn per_labeling_sup_dominates_evidence_term() {
    let mut rng = substream(61, 0);
    for _ in 0..200 {
        let n = rng.random_range(2..=6usize);
        let k = rng.random_range(1..=3usize);
        let cfg = GeneratorConfig::hierarchical(n, 2, 1.0, rng.random());
        let x = sample_dataset(&cfg).unwrap().network;
        let z = Labels::new((0..n).map(|_| rng.random_range(0..k)).collect(), k).unwrap();
        let sup = log_profile_sup(&x, &z).unwrap();
        let term = log_abc(&x, &z).unwrap().total() - log_c(&x);
        assert!(sup - term >= -1e-9, "sup {sup} under evidence term {term}");
    }
}

#[test]
fn sup_sum_matches_per_labeling_enumeration() {
    for seed in 0..5u64 {
        let n = 2 + seed as usize % 4;
        let cfg = GeneratorConfig::hierarchical(n, 2, 1.0, 80 + seed);
        let x = sample_dataset(&cfg).unwrap().network;
        for k in 1..=3usize {
            let mut terms: Vec<f64> = Vec::new();
            for_each_labeling_odometer(n, k, |z| {
                let labels = Labels::new(z.to_vec(), k).unwrap();
                terms.push(log_profile_sup(&x, &labels).unwrap() + log_c(&x));
            });
            let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let brute = max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln();
            let fast = log_profile_sup_sum(&x, k, 10_000_000).unwrap();
            assert!((brute - fast).abs() < 1e-9, "brute {brute} vs fast {fast}");
        }
    }
}

#[test]
fn bracket_from_greedy_search_brackets_small_instances() {
    // On instances small enough for exact evidence, the greedy bracket's
    // lower bound stays below it, and the exhaustive bracket contains it.
    let mut rng = substream(62, 0);
    for seed in 0..10u64 {
        let n = 3 + seed as usize % 5;
        let cfg = GeneratorConfig::hierarchical(n, 2, 1.5, 300 + seed);
        let x = sample_dataset(&cfg).unwrap().network;
        for k in 1..=3usize {
            let exact = log_marginal_exact(&x, k, 10_000_000).unwrap().score();
            let greedy = log_marginal_bracket(
                &x,
                k,
                SearchStrategy::Greedy {
                    restarts: 3,
                    max_sweeps: 30,
                },
                &mut rng,
            )
            .unwrap();
            match greedy.value {
                EvidenceValue::Bracket { lower, upper, .. } => {
                    assert!(lower <= exact + 1e-9);
                    assert!(lower <= upper);
                }
                _ => panic!("bracket expected"),
            }
            let exhaustive = log_marginal_bracket(
                &x,
                k,
                SearchStrategy::Exhaustive { budget: 10_000_000 },
                &mut rng,
            )
            .unwrap();
            match exhaustive.value {
                EvidenceValue::Bracket {
                    lower,
                    upper,
                    rigorous,
                } => {
                    assert!(rigorous);
                    assert!(lower <= exact + 1e-9 && exact <= upper + 1e-9);
                }
                _ => panic!("bracket expected"),
            }
        }
    }
}

#[test]
fn empty_labeling_space_edge_case() {
    // n = 1: a single labeling for every k; evidence still well defined for
    // k > 1 thanks to the empty-community conventions.
    let x = Network::zeros(1).unwrap();
    for k in 1..=3 {
        let r = log_marginal_exact(&x, k, 100).unwrap();
        assert!(r.score().is_finite());
        assert_eq!(r.terms_evaluated, 1);
    }
}
