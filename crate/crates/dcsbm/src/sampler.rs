//! Seeded generation from the hierarchical model or fixed parameters.
//!
//! The hierarchical layers are, in sampling order:
//!
//! 1. `pi ~ Dirichlet(1/2, ..., 1/2)` over the `k0` communities,
//! 2. `z_i ~ pi` i.i.d.,
//! 3. per community `a`: `(w_i)_{i in a} ~ n_a * Dirichlet(1/2, ..., 1/2)`,
//! 4. `lambda_tilde[a][b] ~ Gamma(1/2, 1)` for `a <= b`, mirrored to a
//!    symmetric matrix,
//! 5. edges `x_ij ~ Poisson(w_i w_j rho lambda_tilde[z_i][z_j])` for
//!    `i < j`, and self-loops `m_i ~ Poisson(w_i^2 rho lambda_tilde / 2)`
//!    stored as `x_ii = 2 m_i`.
//!
//! The self-loop rate is the one implied by the joint density and its
//! normalizer, so the generator and the likelihood module describe exactly
//! the same distribution (the one-node evidence test in the marginal module
//! pins this down).
//!
//! Dirichlet draws are realized as normalized independent Gamma(1/2, 1)
//! variates. All sampling is a pure function of the passed RNG state;
//! [`substream`] and [`mix_seed`] are the documented ways to split a root
//! seed into independent streams.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::Labels;
use crate::network::Network;
use crate::params::{validate_params, ModelParams};

/// The RNG used for every seeded stream in this crate.
pub type StreamRng = ChaCha12Rng;

/// Derive an independent ChaCha stream from a root seed.
///
/// Streams with distinct `stream` values never overlap, so parallel workers
/// can each own `substream(root, index)` regardless of scheduling.
pub fn substream(root_seed: u64, stream: u64) -> StreamRng {
    let mut rng = StreamRng::seed_from_u64(root_seed);
    rng.set_stream(stream);
    rng
}

/// Mix a root seed with an index into a new 64-bit seed (SplitMix64 finalizer).
///
/// Used to derive per-trial seeds that are themselves roots for nested
/// substreams.
pub fn mix_seed(root_seed: u64, index: u64) -> u64 {
    let mut v = root_seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    v = v.wrapping_add(0x9e37_79b9_7f4a_7c15);
    v = (v ^ (v >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    v = (v ^ (v >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    v ^ (v >> 31)
}

/// How node weights are produced when `pi` and `lambda_tilde` are fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    /// `w_i = 1` for every node (homogeneous model).
    Ones,
    /// Draw from the per-community scaled Dirichlet(1/2) prior.
    Prior,
}

/// Parameter source for the generator.
#[derive(Debug, Clone)]
pub enum GeneratorMode {
    /// Draw `pi`, `lambda_tilde`, and weights from the hierarchical priors.
    Hierarchical,
    /// Fixed `pi` and `lambda_tilde`; labels are still drawn from `pi` and
    /// weights follow `weights`. A fully fixed `(z, w)` pair bypasses this
    /// type: call [`sample_network`] directly.
    Fixed {
        pi: Vec<f64>,
        lambda_tilde: Vec<Vec<f64>>,
        weights: WeightMode,
    },
}

/// Everything needed to generate one dataset.
#[derive(Debug, Clone)]
pub struct GeneratorConfig {
    pub n: usize,
    pub k0: usize,
    /// Sparsity scale: effective rates are `rho * lambda_tilde`.
    pub rho: f64,
    pub seed: u64,
    pub mode: GeneratorMode,
}

impl GeneratorConfig {
    pub fn hierarchical(n: usize, k0: usize, rho: f64, seed: u64) -> Self {
        GeneratorConfig {
            n,
            k0,
            rho,
            seed,
            mode: GeneratorMode::Hierarchical,
        }
    }

    pub fn fixed(
        n: usize,
        rho: f64,
        seed: u64,
        pi: Vec<f64>,
        lambda_tilde: Vec<Vec<f64>>,
        weights: WeightMode,
    ) -> Self {
        let k0 = pi.len();
        GeneratorConfig {
            n,
            k0,
            rho,
            seed,
            mode: GeneratorMode::Fixed {
                pi,
                lambda_tilde,
                weights,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if self.k0 == 0 {
            return Err(Error::InvalidParameter("k0 must be at least 1".into()));
        }
        if !self.rho.is_finite() || self.rho <= 0.0 {
            return Err(Error::InvalidParameter(
                "rho must be positive and finite".into(),
            ));
        }
        if let GeneratorMode::Fixed {
            pi, lambda_tilde, ..
        } = &self.mode
        {
            if pi.len() != self.k0 {
                return Err(Error::DimensionMismatch(format!(
                    "pi has {} entries, expected k0 = {}",
                    pi.len(),
                    self.k0
                )));
            }
            let sum: f64 = pi.iter().sum();
            if pi.iter().any(|&p| p.is_nan() || p <= 0.0) || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidParameter(
                    "pi must have strictly positive entries summing to 1".into(),
                ));
            }
            if lambda_tilde.len() != self.k0 || lambda_tilde.iter().any(|r| r.len() != self.k0) {
                return Err(Error::DimensionMismatch(format!(
                    "lambda_tilde must be {0} x {0}",
                    self.k0
                )));
            }
            for a in 0..self.k0 {
                for b in 0..self.k0 {
                    let v = lambda_tilde[a][b];
                    if !v.is_finite() || v <= 0.0 {
                        return Err(Error::InvalidParameter(
                            "lambda_tilde entries must be strictly positive".into(),
                        ));
                    }
                    if v != lambda_tilde[b][a] {
                        return Err(Error::InvalidParameter(
                            "lambda_tilde must be symmetric".into(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

/// One generated dataset.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub params: ModelParams,
    pub labels: Labels,
    pub network: Network,
}

fn gamma_half<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // Gamma(1/2, 1); redraw the measure-zero underflow to keep weights and
    // rates strictly positive.
    let dist = Gamma::new(0.5f64, 1.0).expect("valid gamma parameters");
    loop {
        let v = dist.sample(rng);
        if v > 0.0 && v.is_finite() {
            return v;
        }
    }
}

/// Dirichlet(1/2, ..., 1/2) over `k` categories via normalized Gamma draws.
pub fn sample_pi<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    if k == 1 {
        return vec![1.0];
    }
    let draws: Vec<f64> = (0..k).map(|_| gamma_half(rng)).collect();
    let sum: f64 = draws.iter().sum();
    draws.into_iter().map(|g| g / sum).collect()
}

/// `n` i.i.d. labels with marginal distribution `pi`.
pub fn sample_labels<R: Rng + ?Sized>(pi: &[f64], n: usize, rng: &mut R) -> Result<Labels> {
    let k = pi.len();
    if k == 0 {
        return Err(Error::InvalidParameter("pi must be nonempty".into()));
    }
    let sum: f64 = pi.iter().sum();
    if pi.iter().any(|&p| p.is_nan() || p < 0.0) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(
            "pi must be a probability vector".into(),
        ));
    }
    let mut z = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = rng.random::<f64>() * sum;
        let mut acc = 0.0;
        let mut picked = k - 1;
        for (a, &p) in pi.iter().enumerate() {
            acc += p;
            if u < acc {
                picked = a;
                break;
            }
        }
        z.push(picked);
    }
    Labels::new(z, k)
}

/// Per-community weights: `n_a * Dirichlet(1/2, ..., 1/2)` within each
/// community, so each community's weights sum to its size. Singleton
/// communities get the exact weight 1.
pub fn sample_weights<R: Rng + ?Sized>(z: &Labels, rng: &mut R) -> Vec<f64> {
    let n = z.len();
    let k = z.k();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for i in 0..n {
        members[z.get(i)].push(i);
    }
    let mut weights = vec![0.0f64; n];
    for group in members {
        match group.len() {
            0 => {}
            1 => weights[group[0]] = 1.0,
            m => {
                let draws: Vec<f64> = (0..m).map(|_| gamma_half(rng)).collect();
                let sum: f64 = draws.iter().sum();
                for (&i, g) in group.iter().zip(draws) {
                    weights[i] = m as f64 * g / sum;
                }
            }
        }
    }
    weights
}

/// Symmetric `k * k` base-rate matrix with Gamma(1/2, 1) upper-triangle
/// entries.
pub fn sample_lambda_tilde<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut rows = vec![vec![0.0f64; k]; k];
    for a in 0..k {
        for b in a..k {
            let v = gamma_half(rng);
            rows[a][b] = v;
            rows[b][a] = v;
        }
    }
    rows
}

/// Draw `(params, labels)` per the config, in the order pi, z, w, lambda.
pub fn sample_params<R: Rng + ?Sized>(
    cfg: &GeneratorConfig,
    rng: &mut R,
) -> Result<(ModelParams, Labels)> {
    cfg.validate()?;
    match &cfg.mode {
        GeneratorMode::Hierarchical => {
            let pi = sample_pi(cfg.k0, rng);
            let labels = sample_labels(&pi, cfg.n, rng)?;
            let weights = sample_weights(&labels, rng);
            let lambda = sample_lambda_tilde(cfg.k0, rng);
            let params = ModelParams::new(pi, &lambda, cfg.rho, weights)?;
            Ok((params, labels))
        }
        GeneratorMode::Fixed {
            pi,
            lambda_tilde,
            weights,
        } => {
            let labels = sample_labels(pi, cfg.n, rng)?;
            let w = match weights {
                WeightMode::Ones => vec![1.0; cfg.n],
                WeightMode::Prior => sample_weights(&labels, rng),
            };
            let params = ModelParams::new(pi.clone(), lambda_tilde, cfg.rho, w)?;
            Ok((params, labels))
        }
    }
}

fn poisson_draw<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> u64 {
    if rate <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(rate).expect("positive finite poisson rate");
    dist.sample(rng) as u64
}

/// Draw a network given labels and parameters.
///
/// Off-diagonal pairs `i < j` get `Poisson(w_i w_j rho lambda_tilde)` edges;
/// each node gets `Poisson(w_i^2 rho lambda_tilde / 2)` self-loops, stored
/// doubled on the diagonal. Draw order is row-major (`i` ascending, the
/// self-loop before the off-diagonal entries of row `i`).
pub fn sample_network<R: Rng + ?Sized>(
    z: &Labels,
    params: &ModelParams,
    rng: &mut R,
) -> Result<Network> {
    let n = z.len();
    if params.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "params cover {} nodes, labels have {n}",
            params.n()
        )));
    }
    if params.k() != z.k() {
        return Err(Error::DimensionMismatch(format!(
            "params have k = {}, labels have k = {}",
            params.k(),
            z.k()
        )));
    }
    let w = params.weights();
    let mut counts = vec![0u64; n * n];
    for i in 0..n {
        let zi = z.get(i);
        let self_rate = w[i] * w[i] * params.lambda(zi, zi) / 2.0;
        counts[i * n + i] = 2 * poisson_draw(self_rate, rng);
        for j in (i + 1)..n {
            let rate = w[i] * w[j] * params.lambda(zi, z.get(j));
            let c = poisson_draw(rate, rng);
            counts[i * n + j] = c;
            counts[j * n + i] = c;
        }
    }
    Network::new(n, counts)
}

/// Full pipeline: params, labels, then the network, all from
/// `substream(cfg.seed, 0)`.
pub fn sample_dataset(cfg: &GeneratorConfig) -> Result<Dataset> {
    let mut rng = substream(cfg.seed, 0);
    let (params, labels) = sample_params(cfg, &mut rng)?;
    debug_assert!(validate_params(&params, &labels)?);
    let network = sample_network(&labels, &params, &mut rng)?;
    Ok(Dataset {
        params,
        labels,
        network,
    })
}
