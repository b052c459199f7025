//! Log-Laplace transform `Ψ(h) = log E[exp(−h^q ‖X‖^p)]` and its
//! subadditivity.

use serde::{Deserialize, Serialize};

use super::estimate::{norm_samples, SmallBallOptions};
use super::oracle::tauberian_constant;
use crate::error::{invalid, Error, Result};
use crate::processes::ProcessParams;
use crate::seminorms::{SemiNormClass, SemiNormSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplacePoint {
    pub h: f64,
    pub psi: f64,
    pub stderr: f64,
}

/// `Ψ(a+b) ≤ Ψ(a) + Ψ(b) + 3σ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubadditivityCheck {
    pub a: f64,
    pub b: f64,
    pub psi_sum: f64,
    pub bound: f64,
    pub sigma: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaplaceSummary {
    /// `q = p(H − β)`.
    pub q: f64,
    pub p_index: f64,
    pub n_samples: u64,
    pub points: Vec<LaplacePoint>,
    pub pairs: Vec<SubadditivityCheck>,
    /// `Ψ` nonincreasing along the sorted grid.
    pub monotone: bool,
    /// `(h, Ψ(h)/h)` for `h > 0`; tends to `−C`.
    pub ratio_trend: Vec<(f64, f64)>,
    /// `−Ψ(h)/h` at the largest grid point.
    pub c_estimate: Option<f64>,
    /// `tauberian_constant(C, q)` of that estimate.
    pub k_estimate: Option<f64>,
    pub passed: bool,
}

/// `Ψ` at `λ = h^q` with its delta-method error, from `x = ‖X_i‖^p`.
fn psi_at(x: &[f64], lambda: f64) -> (f64, f64) {
    let n = x.len() as f64;
    if lambda == 0.0 {
        return (0.0, 0.0);
    }
    let shift = x.iter().map(|v| -lambda * v).fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = x.iter().map(|v| (-lambda * v - shift).exp()).collect();
    let mean = w.iter().sum::<f64>() / n;
    let var = w.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (shift + mean.ln(), (var / n).sqrt() / mean)
}

/// Monte-Carlo `Ψ(h)` on a grid of `h ≥ 0`, with subadditivity checked on
/// every pair `a ≤ b` of positive grid points.
pub fn log_laplace(
    params: &ProcessParams,
    spec: &SemiNormSpec,
    class: &SemiNormClass,
    h_grid: &[f64],
    n_samples: u64,
    options: &SmallBallOptions,
) -> Result<LaplaceSummary> {
    let p = class.p_index;
    if p.is_infinite() {
        return Err(Error::NotApplicable(
            "p = inf: the Laplace route needs a finite p, use dominance_check".into(),
        ));
    }
    let q = p * (params.hurst() - class.beta);
    if q.is_nan() || q <= 1.0 {
        return Err(Error::NotApplicable(format!(
            "q = p(H - beta) = {q} <= 1"
        )));
    }
    if h_grid.is_empty() || h_grid.iter().any(|h| !(*h >= 0.0 && h.is_finite())) {
        return invalid("h grid must be non-empty, finite and non-negative");
    }
    if n_samples < 2 {
        return invalid("need at least 2 samples");
    }
    let x: Vec<f64> = norm_samples(params, spec, n_samples, options)?
        .into_iter()
        .map(|v| v.powf(p))
        .collect();
    let eval = |h: f64| psi_at(&x, h.powf(q));

    let mut grid = h_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let points: Vec<LaplacePoint> = grid
        .iter()
        .map(|&h| {
            let (psi, stderr) = eval(h);
            LaplacePoint { h, psi, stderr }
        })
        .collect();
    let monotone = points
        .windows(2)
        .all(|w| w[1].psi <= w[0].psi + 1e-12 * w[0].psi.abs());

    let positive: Vec<&LaplacePoint> = points.iter().filter(|p| p.h > 0.0).collect();
    let mut pairs = Vec::new();
    for (i, pa) in positive.iter().enumerate() {
        for pb in &positive[i..] {
            let (psi_sum, se) = eval(pa.h + pb.h);
            let bound = pa.psi + pb.psi;
            let sigma = (se * se + pa.stderr.powi(2) + pb.stderr.powi(2)).sqrt();
            pairs.push(SubadditivityCheck {
                a: pa.h,
                b: pb.h,
                psi_sum,
                bound,
                sigma,
                passed: psi_sum <= bound + 3.0 * sigma,
            });
        }
    }
    let ratio_trend: Vec<(f64, f64)> = positive.iter().map(|p| (p.h, p.psi / p.h)).collect();
    let c_estimate = ratio_trend.last().map(|r| -r.1).filter(|c| *c > 0.0);
    let k_estimate = c_estimate.and_then(|c| tauberian_constant(c, q).ok());
    let passed = monotone && pairs.iter().all(|c| c.passed);
    Ok(LaplaceSummary {
        q,
        p_index: p,
        n_samples,
        points,
        pairs,
        monotone,
        ratio_trend,
        c_estimate,
        k_estimate,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psi_of_constant_sample() {
        let (psi, se) = psi_at(&[2.0; 10], 3.0);
        assert!((psi + 6.0).abs() < 1e-14 && se == 0.0);
        assert_eq!(psi_at(&[1.0, 5.0], 0.0), (0.0, 0.0));
    }
}
