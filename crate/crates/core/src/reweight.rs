//! The reweighting driver: repeated weighted analysis-l1 solves with weights
//! `gamma / (gamma + |alpha_i|)` and a geometrically decreasing `gamma`
//! floored at the sparsity-domain noise level.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linops::{norm2_real, Dictionary};
use crate::sensing::{NoiseModel, SensingOperator};
use crate::solvers::{solve_weighted_l1_warm, SolverParams, SolverResult, WarmStart, WeightVector};

/// Homotopy and stopping parameters of the reweighting loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReweightParams {
    /// Decay rate of gamma, in (0, 1).
    pub beta: f64,
    /// Stop once the relative change between solutions drops to this.
    pub eta: f64,
    /// Maximum number of weighted solves, counting the initial unweighted one.
    pub n_max: usize,
}

impl Default for ReweightParams {
    fn default() -> Self {
        ReweightParams {
            beta: 0.1,
            eta: 1e-3,
            n_max: 10,
        }
    }
}

impl ReweightParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(invalid(format!("beta must lie in (0, 1), got {}", self.beta)));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(invalid(format!("eta must lie in (0, 1), got {}", self.eta)));
        }
        if self.n_max == 0 {
            return Err(invalid("n_max must be at least 1"));
        }
        Ok(())
    }
}

/// Telemetry of one weighted solve. `t = 0` is the unweighted solve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub t: usize,
    /// The gamma in force after this solve.
    pub gamma: f64,
    /// Relative change against the previous solution; 1 for `t = 0`.
    pub rho: f64,
    pub objective: f64,
    pub residual_norm: f64,
    pub inner_iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct ReweightState {
    /// Number of weighted solves performed.
    pub t: usize,
    pub gamma: f64,
    pub weights: WeightVector,
    pub x_current: Vec<f64>,
    pub rho: f64,
    pub history: Vec<IterationRecord>,
    /// Non-fatal conditions, e.g. inner solves that hit their iteration cap.
    pub warnings: Vec<String>,
}

impl ReweightState {
    pub fn total_inner_iterations(&self) -> usize {
        self.history.iter().map(|h| h.inner_iterations).sum()
    }
}

/// `gamma / (gamma + |a|)`.
pub fn weight_fn(gamma: f64, a: Complex64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(invalid(format!("gamma must be positive, got {gamma}")));
    }
    Ok(gamma / (gamma + a.norm()))
}

pub fn update_weights(alpha_hat: &[Complex64], gamma: f64) -> Result<WeightVector> {
    let w = alpha_hat
        .iter()
        .map(|&a| weight_fn(gamma, a))
        .collect::<Result<Vec<_>>>()?;
    // Underflow would leave exact zeros for astronomically large coefficients.
    let w = w.into_iter().map(|v| v.max(f64::MIN_POSITIVE)).collect();
    WeightVector::new(w)
}

/// Population standard deviation of complex samples,
/// `sqrt(mean |a_i - mean(a)|^2)`.
pub fn empirical_std(values: &[Complex64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean: Complex64 = values.iter().sum::<Complex64>() / n;
    (values.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / n).sqrt()
}

/// Standard deviation of the analysis coefficients of `x0`.
pub fn initial_gamma(x0: &[f64], dict: &Dictionary) -> Result<f64> {
    if x0.iter().all(|&v| v == 0.0) {
        return Err(invalid("initial reconstruction is zero"));
    }
    Ok(empirical_std(&dict.analysis_real(x0)?))
}

/// `max(beta gamma_prev, sigma_alpha)`.
pub fn gamma_step(gamma_prev: f64, beta: f64, sigma_alpha: f64) -> f64 {
    (beta * gamma_prev).max(sigma_alpha)
}

/// `|x_t - x_prev|_2 / |x_prev|_2`.
pub fn relative_change(x_t: &[f64], x_prev: &[f64]) -> Result<f64> {
    if x_t.len() != x_prev.len() {
        return Err(invalid("relative_change: length mismatch"));
    }
    let denom = norm2_real(x_prev);
    if denom == 0.0 {
        return Err(invalid("relative_change: previous iterate is zero"));
    }
    let diff: f64 = x_t
        .iter()
        .zip(x_prev)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(diff / denom)
}

fn record(t: usize, gamma: f64, rho: f64, res: &SolverResult) -> IterationRecord {
    IterationRecord {
        t,
        gamma,
        rho,
        objective: res.objective,
        residual_norm: res.residual_norm,
        inner_iterations: res.iterations,
        converged: res.converged,
    }
}

/// Full reweighted reconstruction. `sp.epsilon` is replaced by the noise
/// model's radius. With `rw.n_max == 1` only the unweighted problem is solved.
pub fn sara_reconstruct(
    y: &[Complex64],
    op: &SensingOperator,
    dict: &Dictionary,
    noise: &NoiseModel,
    rw: &ReweightParams,
    sp: &SolverParams,
) -> Result<(Vec<f64>, ReweightState)> {
    rw.validate()?;
    let params = SolverParams {
        epsilon: noise.epsilon,
        ..sp.clone()
    };
    let d = dict.coeff_len();
    let mut warnings = Vec::new();
    let mut weights = WeightVector::ones(d);

    let first = solve_weighted_l1_warm(y, op, dict, &weights, &params, None)?;
    if !first.converged {
        warnings.push(format!(
            "t=0: weighted solve stopped after {} iterations without converging",
            first.iterations
        ));
    }
    let mut gamma = match initial_gamma(&first.x_hat, dict) {
        Ok(g) => g.max(noise.sigma_alpha),
        Err(_) => noise.sigma_alpha,
    };
    if !(gamma > 0.0) {
        // Noiseless data with a zero reconstruction: any positive value works.
        gamma = f64::MIN_POSITIVE.sqrt();
    }
    let mut history = vec![record(0, gamma, 1.0, &first)];
    let mut warm = WarmStart::from_result(&first);
    let mut x_prev = first.x_hat;
    let mut rho = 1.0;
    let mut t = 1;

    while rho > rw.eta && t < rw.n_max {
        let alpha = dict.analysis_real(&x_prev)?;
        weights = update_weights(&alpha, gamma)?;
        let res = solve_weighted_l1_warm(y, op, dict, &weights, &params, Some(&warm))?;
        if !res.converged {
            warnings.push(format!(
                "t={t}: weighted solve stopped after {} iterations without converging",
                res.iterations
            ));
        }
        gamma = gamma_step(gamma, rw.beta, noise.sigma_alpha);
        rho = match relative_change(&res.x_hat, &x_prev) {
            Ok(r) => r,
            Err(_) => {
                warnings.push(format!("t={t}: previous iterate was zero"));
                0.0
            }
        };
        history.push(record(t, gamma, rho, &res));
        warm = WarmStart::from_result(&res);
        x_prev = res.x_hat;
        t += 1;
    }

    let state = ReweightState {
        t,
        gamma,
        weights,
        x_current: x_prev.clone(),
        rho,
        history,
        warnings,
    };
    Ok((x_prev, state))
}
