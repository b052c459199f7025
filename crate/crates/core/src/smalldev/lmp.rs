//! Small-ball comparison of the long-memory part `M` with the
//! Riemann–Liouville part `R` of the same parameters.

use serde::{Deserialize, Serialize};

use super::estimate::{check_epsilons, SmallBallOptions, MIN_SAMPLES};
use crate::error::{invalid, Result};
use crate::processes::{process_scheme, ProcessKind, ProcessParams};
use crate::seminorms::{classify, evaluate_slice, rate_gamma, SemiNormSpec};

/// Minimum number of `R` hits for an `ε` to count as feasible.
pub const MIN_HITS: u64 = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NegligibleRow {
    pub epsilon: f64,
    pub hits_m: u64,
    pub hits_r: u64,
    pub p_m: f64,
    pub p_r: f64,
    /// `ε^γ log p̂_M`, absent without hits.
    pub stat_m: Option<f64>,
    pub stat_r: Option<f64>,
    /// `|stat_M| / |stat_R|`.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegligibleReport {
    pub params: ProcessParams,
    pub seminorm: SemiNormSpec,
    pub gamma: f64,
    pub n_samples: u64,
    /// Rows by decreasing `ε`.
    pub rows: Vec<NegligibleRow>,
    /// Smallest `ε` with at least [`MIN_HITS`] hits of `R` (and some of `M`).
    pub smallest_feasible: Option<f64>,
    pub ratio_at_smallest: Option<f64>,
    /// Feasible rows over which the ratio decreases strictly as `ε` does.
    pub decreasing_run: usize,
}

impl NegligibleReport {
    /// Ratio below `bound` at the smallest feasible `ε` and strictly
    /// decreasing over at least `min_run` feasible values.
    pub fn passes(&self, bound: f64, min_run: usize) -> bool {
        self.ratio_at_smallest.is_some_and(|r| r < bound) && self.decreasing_run >= min_run
    }
}

/// Tabulates `ε^γ log p̂` for `M` and `R`, with `γ` the rate of `R`. Path `i`
/// of both processes shares the index, so `R` and `M` are the two
/// independent components of the same linear fractional stable path.
pub fn lmp_negligible(
    params: &ProcessParams,
    spec: &SemiNormSpec,
    epsilons: &[f64],
    n_samples: u64,
    options: &SmallBallOptions,
) -> Result<NegligibleReport> {
    check_epsilons(epsilons)?;
    if n_samples < MIN_SAMPLES {
        return invalid(format!("n_samples = {n_samples} < {MIN_SAMPLES}"));
    }
    let lmp = params.with_kind(ProcessKind::Lmp)?;
    let rlp = params.with_kind(ProcessKind::Rlp)?;
    let gamma = rate_gamma(params.hurst(), &classify(spec))?;
    let grid = options.grid()?;
    let dt = grid.step();
    let norms = |p: &ProcessParams| -> Result<Vec<f64>> {
        let scheme = process_scheme(p, grid, options.tail_tolerance)?;
        Ok(scheme
            .sampler(options.seed)
            .map(0..n_samples, |_, v| evaluate_slice(spec, v, dt)))
    };
    let mut nm = norms(&lmp)?;
    let mut nr = norms(&rlp)?;
    nm.sort_by(f64::total_cmp);
    nr.sort_by(f64::total_cmp);

    let mut eps = epsilons.to_vec();
    eps.sort_by(|a, b| b.total_cmp(a));
    let n = n_samples as f64;
    let stat = |e: f64, hits: u64| (hits > 0).then(|| e.powf(gamma) * (hits as f64 / n).ln());
    let rows: Vec<NegligibleRow> = eps
        .iter()
        .map(|&e| {
            let hits_m = nm.partition_point(|&v| v <= e) as u64;
            let hits_r = nr.partition_point(|&v| v <= e) as u64;
            let (stat_m, stat_r) = (stat(e, hits_m), stat(e, hits_r));
            let ratio = match (stat_m, stat_r) {
                (Some(m), Some(r)) if r != 0.0 => Some(m.abs() / r.abs()),
                _ => None,
            };
            NegligibleRow {
                epsilon: e,
                hits_m,
                hits_r,
                p_m: hits_m as f64 / n,
                p_r: hits_r as f64 / n,
                stat_m,
                stat_r,
                ratio,
            }
        })
        .collect();
    let feasible: Vec<&NegligibleRow> = rows
        .iter()
        .filter(|r| r.hits_r >= MIN_HITS && r.ratio.is_some())
        .collect();
    let last = feasible.last();
    let mut decreasing_run = usize::from(!feasible.is_empty());
    let mut run = decreasing_run;
    for w in feasible.windows(2) {
        run = if w[1].ratio < w[0].ratio { run + 1 } else { 1 };
        decreasing_run = decreasing_run.max(run);
    }
    Ok(NegligibleReport {
        params: *params,
        seminorm: *spec,
        gamma,
        n_samples,
        smallest_feasible: last.map(|r| r.epsilon),
        ratio_at_smallest: last.and_then(|r| r.ratio),
        rows,
        decreasing_run,
    })
}
