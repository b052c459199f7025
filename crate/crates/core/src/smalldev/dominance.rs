//! Stochastic dominance behind the superadditivity of `log P[‖X‖ ≤ ε]`.
//!
//! For `p < ∞`: `(a+b)^q ‖R‖^p ⪰ a^q ‖R₁‖^p + b^q ‖R₂‖^p` with `R₁, R₂`
//! independent copies and `q = p(H − β)`. For `p = ∞`:
//! `P[(a+b)^q ‖R‖ ≤ r] ≤ P[a^q ‖R‖ ≤ r] P[b^q ‖R‖ ≤ r]` with `q = H − β`.

use serde::{Deserialize, Serialize};

use super::estimate::{norm_samples, SmallBallOptions};
use crate::error::{invalid, Error, Result};
use crate::processes::ProcessParams;
use crate::seminorms::{SemiNormClass, SemiNormSpec};
use crate::stats::{dkw_epsilon, ecdf_sorted, quantile_sorted};

pub const DKW_CONFIDENCE: f64 = 0.999;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DominanceBranch {
    /// Empirical CDFs compared within a DKW band.
    Cdf,
    /// Product inequality with `3σ` slack.
    Product,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominancePoint {
    pub r: f64,
    /// `P̂[(a+b)^q ‖R‖^• ≤ r]`.
    pub lhs: f64,
    /// CDF of the sum (`Cdf`) or the product of probabilities (`Product`).
    pub rhs: f64,
    pub slack: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub a: f64,
    pub b: f64,
    pub q: f64,
    pub branch: DominanceBranch,
    pub n_samples: u64,
    pub points: Vec<DominancePoint>,
    /// Largest `lhs − rhs − slack` over the grid.
    pub max_excess: f64,
    pub passed: bool,
}

/// Default `r` grid: 49 quantiles of the left-hand side sample.
fn default_grid(lhs_sorted: &[f64]) -> Vec<f64> {
    (1..50).map(|i| quantile_sorted(lhs_sorted, i as f64 / 50.0)).collect()
}

/// Checks the dominance on an `r` grid (quantiles of the left-hand side when
/// `r_grid` is `None`). Paths `0..n` give `R = R₁`, paths `n..2n` give `R₂`;
/// the `p = ∞` branch uses paths `0..n` for all three laws.
#[allow(clippy::too_many_arguments)]
pub fn dominance_check(
    params: &ProcessParams,
    spec: &SemiNormSpec,
    class: &SemiNormClass,
    a: f64,
    b: f64,
    r_grid: Option<&[f64]>,
    n_samples: u64,
    options: &SmallBallOptions,
) -> Result<DominanceReport> {
    if !(a >= 0.0 && b >= 0.0 && a + b > 0.0 && a.is_finite() && b.is_finite()) {
        return invalid(format!("a = {a}, b = {b} must be non-negative, not both zero"));
    }
    if n_samples < 2 {
        return invalid("need at least 2 samples");
    }
    let p = class.p_index;
    let finite = p.is_finite();
    let q = if finite { p } else { 1.0 } * (params.hurst() - class.beta);
    if q.is_nan() || q <= 0.0 {
        return Err(Error::NotApplicable(format!("q = {q} <= 0 (H <= beta)")));
    }
    let n = n_samples as usize;
    let total = if finite { 2 * n_samples } else { n_samples };
    let norms = norm_samples(params, spec, total, options)?;
    let (ca, cb, cab) = (a.powf(q), b.powf(q), (a + b).powf(q));

    let (branch, points) = if finite {
        let x: Vec<f64> = norms.iter().map(|v| v.powf(p)).collect();
        let mut lhs: Vec<f64> = x[..n].iter().map(|v| cab * v).collect();
        let mut rhs: Vec<f64> = x[..n]
            .iter()
            .zip(&x[n..])
            .map(|(v1, v2)| ca * v1 + cb * v2)
            .collect();
        lhs.sort_by(f64::total_cmp);
        rhs.sort_by(f64::total_cmp);
        let grid = r_grid.map_or_else(|| default_grid(&lhs), <[f64]>::to_vec);
        // Union bound over the two empirical CDFs.
        let band = 2.0 * dkw_epsilon(n, 1.0 - (1.0 - DKW_CONFIDENCE) / 2.0);
        let pts: Vec<DominancePoint> = grid
            .iter()
            .map(|&r| {
                let (fl, fr) = (ecdf_sorted(&lhs, r), ecdf_sorted(&rhs, r));
                DominancePoint {
                    r,
                    lhs: fl,
                    rhs: fr,
                    slack: band,
                    passed: fl <= fr + band,
                }
            })
            .collect();
        (DominanceBranch::Cdf, pts)
    } else {
        let mut x = norms;
        x.sort_by(f64::total_cmp);
        let lhs_sorted: Vec<f64> = x.iter().map(|v| cab * v).collect();
        let grid = r_grid.map_or_else(|| default_grid(&lhs_sorted), <[f64]>::to_vec);
        let nf = n as f64;
        let prob = |c: f64, r: f64| {
            if c == 0.0 {
                if r >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                ecdf_sorted(&x, r / c)
            }
        };
        let pts: Vec<DominancePoint> = grid
            .iter()
            .map(|&r| {
                let pl = prob(cab, r);
                let (pa, pb) = (prob(ca, r), prob(cb, r));
                let var = (pl * (1.0 - pl) + pb * pb * pa * (1.0 - pa) + pa * pa * pb * (1.0 - pb))
                    / nf;
                let slack = 3.0 * var.sqrt();
                DominancePoint {
                    r,
                    lhs: pl,
                    rhs: pa * pb,
                    slack,
                    passed: pl <= pa * pb + slack,
                }
            })
            .collect();
        (DominanceBranch::Product, pts)
    };
    let max_excess = points
        .iter()
        .map(|p: &DominancePoint| p.lhs - p.rhs - p.slack)
        .fold(f64::NEG_INFINITY, f64::max);
    let passed = points.iter().all(|p| p.passed);
    Ok(DominanceReport {
        a,
        b,
        q,
        branch,
        n_samples,
        points,
        max_excess,
        passed,
    })
}
