//! Model parameters (pi, lambda_tilde, rho, w).

use crate::error::{Error, Result};
use crate::labels::Labels;

/// Tolerance for the simplex and per-community weight-sum constraints.
pub const WEIGHT_TOLERANCE: f64 = 1e-9;

/// Parameters of a `k`-community DCSBM on `n` nodes.
///
/// The Poisson rate between nodes `i` and `j` is
/// `w[i] * w[j] * rho * lambda_tilde[z_i][z_j]`. Weights are constrained to
/// sum to the community size within each community, so `w = 1` everywhere is
/// always feasible and recovers the homogeneous model.
///
/// Maximum-likelihood plug-ins live on the boundary of the parameter space
/// (zero block rates, zero weights on isolated nodes), so the struct stores
/// nonnegative values; [`validate_params`] checks the closed constraint set.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pi: Vec<f64>,
    lambda_tilde: Vec<f64>, // k x k, row-major, symmetric
    rho: f64,
    weights: Vec<f64>,
}

impl ModelParams {
    /// Build from a flat row-major `k * k` rate matrix.
    pub fn from_flat(
        pi: Vec<f64>,
        lambda_tilde: Vec<f64>,
        rho: f64,
        weights: Vec<f64>,
    ) -> Result<Self> {
        let k = pi.len();
        if k == 0 {
            return Err(Error::InvalidParameter("pi must be nonempty".into()));
        }
        if lambda_tilde.len() != k * k {
            return Err(Error::DimensionMismatch(format!(
                "lambda_tilde has {} entries, expected {} for k = {k}",
                lambda_tilde.len(),
                k * k
            )));
        }
        if !rho.is_finite() {
            return Err(Error::InvalidParameter("rho must be finite".into()));
        }
        Ok(ModelParams {
            pi,
            lambda_tilde,
            rho,
            weights,
        })
    }

    /// Build from nested rate-matrix rows.
    pub fn new(
        pi: Vec<f64>,
        lambda_rows: &[Vec<f64>],
        rho: f64,
        weights: Vec<f64>,
    ) -> Result<Self> {
        let k = pi.len();
        if lambda_rows.len() != k || lambda_rows.iter().any(|r| r.len() != k) {
            return Err(Error::DimensionMismatch(format!(
                "lambda_tilde must be {k} x {k}"
            )));
        }
        Self::from_flat(
            pi,
            lambda_rows.iter().flatten().copied().collect(),
            rho,
            weights,
        )
    }

    pub fn k(&self) -> usize {
        self.pi.len()
    }

    /// Number of nodes the weight vector covers.
    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    #[inline]
    pub fn lambda_tilde(&self, a: usize, b: usize) -> f64 {
        self.lambda_tilde[a * self.k() + b]
    }

    /// Effective rate `rho * lambda_tilde[a][b]`.
    #[inline]
    pub fn lambda(&self, a: usize, b: usize) -> f64 {
        self.rho * self.lambda_tilde(a, b)
    }

    pub fn lambda_tilde_flat(&self) -> &[f64] {
        &self.lambda_tilde
    }
}

/// Check the parameter constraints against an assignment.
///
/// Returns `Ok(true)` when `pi` is a probability vector (entries `>= 0`, sum
/// within [`WEIGHT_TOLERANCE`] of 1), `lambda_tilde` is symmetric with
/// nonnegative finite entries, `rho > 0`, all weights are nonnegative and
/// finite, and within each nonempty community the weights sum to the
/// community size within [`WEIGHT_TOLERANCE`]. Dimension mismatches are
/// errors rather than `false`.
pub fn validate_params(params: &ModelParams, z: &Labels) -> Result<bool> {
    let k = params.k();
    if z.k() != k {
        return Err(Error::DimensionMismatch(format!(
            "params have k = {k}, labels have k = {}",
            z.k()
        )));
    }
    if params.n() != z.len() {
        return Err(Error::DimensionMismatch(format!(
            "params have {} weights, labels have {} nodes",
            params.n(),
            z.len()
        )));
    }

    let pi_sum: f64 = params.pi.iter().sum();
    if params.pi.iter().any(|&p| !p.is_finite() || p < 0.0)
        || (pi_sum - 1.0).abs() > WEIGHT_TOLERANCE
    {
        return Ok(false);
    }
    for a in 0..k {
        for b in 0..k {
            let v = params.lambda_tilde(a, b);
            if !v.is_finite() || v < 0.0 || v != params.lambda_tilde(b, a) {
                return Ok(false);
            }
        }
    }
    if params.rho.is_nan() || params.rho <= 0.0 {
        return Ok(false);
    }
    if params.weights.iter().any(|&w| !w.is_finite() || w < 0.0) {
        return Ok(false);
    }
    let mut sums = vec![0.0f64; k];
    for (i, &a) in z.as_slice().iter().enumerate() {
        sums[a] += params.weights[i];
    }
    let sizes = z.community_sizes();
    for a in 0..k {
        if sizes[a] > 0 && (sums[a] - sizes[a] as f64).abs() > WEIGHT_TOLERANCE {
            return Ok(false);
        }
    }
    Ok(true)
}
