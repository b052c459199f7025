//! Monte-Carlo small-ball probabilities with common random numbers.

use serde::{Deserialize, Serialize};

use super::oracle::bridge_stay_probability;
use crate::error::{invalid, Result};
use crate::processes::{process_scheme, Grid, ProcessKind, ProcessParams, DEFAULT_TAIL_TOLERANCE};
use crate::seminorms::{evaluate_slice, SemiNormKind, SemiNormSpec};
use crate::stable_rng::NoiseStream;

/// Lane of [`NoiseStream::for_path`] holding the bridge acceptance uniforms.
const UNIFORM_LANE: u64 = 3;

/// Smallest sample size accepted by [`mc_small_ball`].
pub const MIN_SAMPLES: u64 = 1000;

/// How a path is judged to lie in the ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// [`Estimator::Bridge`] where it is exact, otherwise [`Estimator::Grid`].
    Auto,
    /// The grid evaluation of the semi-norm is compared with `ε`.
    Grid,
    /// Brownian paths under the sup-norm: continuous-time monitoring drawn
    /// exactly from the grid values via Brownian-bridge crossing
    /// probabilities.
    Bridge,
}

impl std::str::FromStr for Estimator {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Self::Auto),
            "grid" => Ok(Self::Grid),
            "bridge" => Ok(Self::Bridge),
            other => invalid(format!("unknown estimator '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallBallOptions {
    /// Grid level `J`: paths on `2^J` cells of `[0, 1]`.
    pub level: u32,
    pub seed: u64,
    pub estimator: Estimator,
    /// Truncation tolerance of long-memory kernels.
    pub tail_tolerance: f64,
}

impl SmallBallOptions {
    pub fn new(level: u32, seed: u64) -> Self {
        Self {
            level,
            seed,
            estimator: Estimator::Auto,
            tail_tolerance: DEFAULT_TAIL_TOLERANCE,
        }
    }

    pub fn with_estimator(mut self, estimator: Estimator) -> Self {
        self.estimator = estimator;
        self
    }

    pub(crate) fn grid(&self) -> Result<Grid> {
        if !(1..=20).contains(&self.level) {
            return invalid(format!("grid level {} outside 1..=20", self.level));
        }
        Ok(Grid::unit(self.level))
    }
}

/// `P̂[‖X‖ ≤ ε]` from `hits` of `n_samples` paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallBallEstimate {
    pub epsilon: f64,
    pub hits: u64,
    /// Zero for exact (oracle) values.
    pub n_samples: u64,
    pub p_hat: f64,
    /// `√(p̂(1−p̂)/n)`.
    pub stderr: f64,
    /// `log p̂`, absent when no path hit.
    pub log_p: Option<f64>,
    /// Delta-method error `√((1−p̂)/(n p̂))` of `log p̂`.
    pub log_p_stderr: Option<f64>,
    /// One-sided 95% upper bound `1 − 0.05^{1/n}` reported instead of a
    /// point estimate when no path hit.
    pub upper_bound: Option<f64>,
}

impl SmallBallEstimate {
    pub fn from_counts(epsilon: f64, hits: u64, n_samples: u64) -> Self {
        let n = n_samples as f64;
        let p = hits as f64 / n;
        let (log_p, log_p_stderr, upper_bound) = if hits == 0 {
            (None, None, Some(1.0 - 0.05f64.powf(1.0 / n)))
        } else {
            (Some(p.ln()), Some(((1.0 - p) / (n * p)).sqrt()), None)
        };
        Self {
            epsilon,
            hits,
            n_samples,
            p_hat: p,
            stderr: (p * (1.0 - p) / n).sqrt(),
            log_p,
            log_p_stderr,
            upper_bound,
        }
    }

    /// An exactly known probability (no sampling error).
    pub fn exact(epsilon: f64, p: f64) -> Self {
        Self {
            epsilon,
            hits: 0,
            n_samples: 0,
            p_hat: p,
            stderr: 0.0,
            log_p: (p > 0.0).then(|| p.ln()),
            log_p_stderr: (p > 0.0).then_some(0.0),
            upper_bound: None,
        }
    }

    /// No hit observed: only an upper bound is known.
    pub fn censored(&self) -> bool {
        self.n_samples > 0 && self.hits == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallBallRun {
    pub params: ProcessParams,
    pub seminorm: SemiNormSpec,
    pub options: SmallBallOptions,
    /// The estimator actually applied (never `Auto`).
    pub estimator: Estimator,
    pub estimates: Vec<SmallBallEstimate>,
    /// With the bridge estimator: hit counts of the plain grid evaluation on
    /// the same paths, for comparison.
    pub grid_hits: Option<Vec<u64>>,
}

/// Whether the process is a Brownian motion (possibly scaled).
fn is_brownian(params: &ProcessParams) -> bool {
    params.alpha().is_gaussian()
        && params.h_prime().abs() < 1e-12
        && matches!(params.kind(), ProcessKind::Rlp | ProcessKind::Lfsm)
}

fn resolve(params: &ProcessParams, spec: &SemiNormSpec, e: Estimator) -> Result<Estimator> {
    let exact = is_brownian(params) && spec.kind() == SemiNormKind::Sup;
    match e {
        Estimator::Auto if exact => Ok(Estimator::Bridge),
        Estimator::Auto => Ok(Estimator::Grid),
        Estimator::Bridge if !exact => invalid(
            "bridge estimator needs a Brownian process (alpha = 2, H = 1/2, rlp or lfsm) and the SUP norm",
        ),
        other => Ok(other),
    }
}

pub(crate) fn check_epsilons(epsilons: &[f64]) -> Result<()> {
    if epsilons.is_empty() {
        return invalid("empty epsilon grid");
    }
    if let Some(e) = epsilons.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return invalid(format!("epsilon = {e} must be positive and finite"));
    }
    Ok(())
}

/// Grid semi-norm values of paths `0..n` of the process.
pub fn norm_samples(
    params: &ProcessParams,
    spec: &SemiNormSpec,
    n: u64,
    options: &SmallBallOptions,
) -> Result<Vec<f64>> {
    let grid = options.grid()?;
    let scheme = process_scheme(params, grid, options.tail_tolerance)?;
    let dt = grid.step();
    Ok(scheme
        .sampler(options.seed)
        .map(0..n, |_, v| evaluate_slice(spec, v, dt)))
}

/// Order of `epsilons` ascending, as indices.
fn ascending(epsilons: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..epsilons.len()).collect();
    order.sort_by(|&i, &j| epsilons[i].total_cmp(&epsilons[j]));
    order
}

/// Counts per ε from per-path "first hit" ranks in ascending ε order: a path
/// with rank `k` lies in every ball from the `k`-th smallest on.
fn counts_from_ranks(ranks: impl Iterator<Item = usize>, order: &[usize]) -> Vec<u64> {
    let m = order.len();
    let mut hist = vec![0u64; m + 1];
    for k in ranks {
        hist[k] += 1;
    }
    let mut counts = vec![0u64; m];
    let mut acc = 0;
    for (pos, &idx) in order.iter().enumerate() {
        acc += hist[pos];
        counts[idx] = acc;
    }
    counts
}

/// Estimates `P[‖X‖ ≤ ε]` for every `ε` on the same `n_samples` paths.
///
/// The counts are monotone in `ε` by construction.
pub fn mc_small_ball(
    params: &ProcessParams,
    spec: &SemiNormSpec,
    epsilons: &[f64],
    n_samples: u64,
    options: &SmallBallOptions,
) -> Result<SmallBallRun> {
    check_epsilons(epsilons)?;
    if n_samples < MIN_SAMPLES {
        return invalid(format!("n_samples = {n_samples} < {MIN_SAMPLES}"));
    }
    let estimator = resolve(params, spec, options.estimator)?;
    let grid = options.grid()?;
    let scheme = process_scheme(params, grid, options.tail_tolerance)?;
    let order = ascending(epsilons);
    let sorted: Vec<f64> = order.iter().map(|&i| epsilons[i]).collect();
    let m = sorted.len();
    let dt = grid.step();
    let sampler = scheme.sampler(options.seed);

    let (counts, grid_hits) = match estimator {
        Estimator::Grid => {
            let ranks = sampler.map(0..n_samples, |_, v| {
                let norm = evaluate_slice(spec, v, dt);
                sorted.partition_point(|&e| e < norm)
            });
            (counts_from_ranks(ranks.into_iter(), &order), None)
        }
        Estimator::Bridge => {
            let f = params.output_factor();
            let var = 2.0 * f * f * dt;
            let seed = options.seed;
            let ranks = sampler.map(0..n_samples, |i, v| {
                let max = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
                let grid_rank = sorted.partition_point(|&e| e < max);
                let u = NoiseStream::for_path(seed, i, UNIFORM_LANE).uniform_at(0);
                // The stay probability grows with ε: scan down from the largest.
                let mut rank = m;
                while rank > grid_rank && stays(v, sorted[rank - 1], var, u) {
                    rank -= 1;
                }
                (rank, grid_rank)
            });
            let bridge = counts_from_ranks(ranks.iter().map(|r| r.0), &order);
            let plain = counts_from_ranks(ranks.iter().map(|r| r.1), &order);
            (bridge, Some(plain))
        }
        Estimator::Auto => unreachable!("resolved above"),
    };
    let estimates = epsilons
        .iter()
        .zip(&counts)
        .map(|(&e, &c)| SmallBallEstimate::from_counts(e, c, n_samples))
        .collect();
    Ok(SmallBallRun {
        params: *params,
        seminorm: *spec,
        options: *options,
        estimator,
        estimates,
        grid_hits,
    })
}

/// `u < Π_cells P[bridge stays in (−ε, ε)]`, stopping once the product
/// drops below `u`.
fn stays(v: &[f64], epsilon: f64, var: f64, u: f64) -> bool {
    let mut prod = 1.0;
    for w in v.windows(2) {
        let p = bridge_stay_probability(w[0], w[1], epsilon, var);
        if p < 1.0 {
            prod *= p;
            if prod <= u {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_are_cumulative() {
        let eps = [0.3, 0.1, 0.2];
        let order = ascending(&eps);
        // ranks: 0 → in all, 1 → in 0.2 and 0.3, 3 → in none
        let c = counts_from_ranks([0usize, 1, 1, 3].into_iter(), &order);
        assert_eq!(c, vec![3, 1, 3]);
    }

    #[test]
    fn censored_estimate() {
        let e = SmallBallEstimate::from_counts(0.1, 0, 1000);
        assert!(e.censored() && e.log_p.is_none());
        assert!((e.upper_bound.unwrap() - 0.002991).abs() < 1e-5);
    }

    #[test]
    fn bridge_needs_brownian_sup() {
        let p = ProcessParams::rlp(2.0, 0.75).unwrap();
        let r = resolve(&p, &SemiNormSpec::sup(), Estimator::Bridge);
        assert!(r.is_err());
        let b = ProcessParams::rlp(2.0, 0.5).unwrap();
        assert_eq!(
            resolve(&b, &SemiNormSpec::sup(), Estimator::Auto).unwrap(),
            Estimator::Bridge
        );
        assert_eq!(
            resolve(&b, &SemiNormSpec::lp(2.0).unwrap(), Estimator::Auto).unwrap(),
            Estimator::Grid
        );
    }
}
