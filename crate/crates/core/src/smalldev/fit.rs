//! Rate and constant fits of `log P[‖X‖ ≤ ε] ≈ −K ε^{−γ}`.

use serde::{Deserialize, Serialize};

use super::estimate::SmallBallEstimate;
use crate::error::{invalid, Error, Result};
use crate::stats::weighted_line;

/// Per-point constant `K(ε) = −ε^γ log p̂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantPoint {
    pub epsilon: f64,
    pub k: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub gamma_hat: f64,
    pub k_hat: f64,
    /// Covariance of `(log K̂, γ̂)`; the `γ` entries are zero when fixed.
    pub covariance: [[f64; 2]; 2],
    /// Smallest and largest `ε` used.
    pub epsilon_range: (f64, f64),
    pub points_used: usize,
    /// `ε` values left out because `p̂ ∈ {0, 1}`.
    pub excluded: Vec<f64>,
    pub gamma_fixed: Option<f64>,
    /// Per-point constants (with `gamma_fixed` only).
    pub k_points: Vec<ConstantPoint>,
}

/// Weighted least squares of `log(−log p̂)` on `log(1/ε)`: the slope is `γ̂`
/// and the intercept `log K̂`. Weights are inverse delta-method variances,
/// or uniform when some estimate is exact.
///
/// With `gamma_fixed`, returns `K(ε) = −ε^γ log p̂` per point and their
/// weighted mean as `K̂`.
pub fn fit_rate(estimates: &[SmallBallEstimate], gamma_fixed: Option<f64>) -> Result<RateFit> {
    if let Some(g) = gamma_fixed {
        if !(g > 0.0 && g.is_finite()) {
            return invalid(format!("gamma_fixed = {g} must be positive"));
        }
    }
    let (used, excluded): (Vec<&SmallBallEstimate>, Vec<&SmallBallEstimate>) = estimates
        .iter()
        .partition(|e| e.p_hat > 0.0 && e.p_hat < 1.0 && e.epsilon > 0.0);
    let excluded: Vec<f64> = excluded.iter().map(|e: &&SmallBallEstimate| e.epsilon).collect();
    let needed = if gamma_fixed.is_some() { 1 } else { 3 };
    if used.len() < needed {
        return Err(Error::Degenerate(format!(
            "{} usable estimates with p in (0, 1), need {needed}",
            used.len()
        )));
    }
    // Var of log(−log p̂) from the delta method.
    let var_y: Vec<f64> = used
        .iter()
        .map(|e| {
            let lp = e.p_hat.ln();
            let s = e.log_p_stderr.unwrap_or(0.0);
            (s / lp).powi(2)
        })
        .collect();
    let uniform = var_y.iter().any(|&v| !(v > 0.0 && v.is_finite()));
    let w: Vec<f64> = var_y
        .iter()
        .map(|&v| if uniform { 1.0 } else { 1.0 / v })
        .collect();
    let eps: Vec<f64> = used.iter().map(|e| e.epsilon).collect();
    let epsilon_range = (
        eps.iter().copied().fold(f64::INFINITY, f64::min),
        eps.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );

    match gamma_fixed {
        None => {
            let x: Vec<f64> = eps.iter().map(|e| -e.ln()).collect();
            let y: Vec<f64> = used.iter().map(|e| (-e.p_hat.ln()).ln()).collect();
            let line = weighted_line(&x, &y, &w)?;
            let covariance = if uniform {
                residual_covariance(&x, &y, &line)
            } else {
                line.covariance
            };
            Ok(RateFit {
                gamma_hat: line.slope,
                k_hat: line.intercept.exp(),
                covariance,
                epsilon_range,
                points_used: used.len(),
                excluded,
                gamma_fixed: None,
                k_points: Vec::new(),
            })
        }
        Some(g) => {
            let k_points: Vec<ConstantPoint> = used
                .iter()
                .map(|e| {
                    let scale = e.epsilon.powf(g);
                    ConstantPoint {
                        epsilon: e.epsilon,
                        k: -scale * e.p_hat.ln(),
                        stderr: scale * e.log_p_stderr.unwrap_or(0.0),
                    }
                })
                .collect();
            let wk: Vec<f64> = k_points
                .iter()
                .map(|p| {
                    if uniform || p.stderr <= 0.0 {
                        1.0
                    } else {
                        p.stderr.powi(-2)
                    }
                })
                .collect();
            let sw: f64 = wk.iter().sum();
            let k_hat = k_points.iter().zip(&wk).map(|(p, w)| p.k * w).sum::<f64>() / sw;
            let var_k = if uniform {
                let n = k_points.len() as f64;
                if n > 1.0 {
                    k_points.iter().map(|p| (p.k - k_hat).powi(2)).sum::<f64>() / (n - 1.0) / n
                } else {
                    0.0
                }
            } else {
                1.0 / sw
            };
            Ok(RateFit {
                gamma_hat: g,
                k_hat,
                covariance: [[var_k / (k_hat * k_hat), 0.0], [0.0, 0.0]],
                epsilon_range,
                points_used: used.len(),
                excluded,
                gamma_fixed: Some(g),
                k_points,
            })
        }
    }
}

/// Ordinary least squares covariance with the residual variance.
fn residual_covariance(x: &[f64], y: &[f64], line: &crate::stats::LineFit) -> [[f64; 2]; 2] {
    let n = x.len() as f64;
    if n <= 2.0 {
        return line.covariance;
    }
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| (yi - line.intercept - line.slope * xi).powi(2))
        .sum();
    let s2 = rss / (n - 2.0);
    line.covariance.map(|row| row.map(|c| c * s2))
}
