//! Empirical level decay of Schauder coefficients of simulated paths.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::processes::{process_scheme, Grid, ProcessParams, DEFAULT_TAIL_TOLERANCE};
use crate::stats::{quantile_sorted, weighted_line};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingOptions {
    /// Grid level `J` of the simulated paths (`2^J` cells).
    pub grid_level: u32,
    pub min_level: u32,
    pub max_level: u32,
    pub n_paths: usize,
    pub seed: u64,
    pub bootstrap: usize,
}

impl ScalingOptions {
    pub fn new(seed: u64, n_paths: usize) -> Self {
        Self {
            grid_level: 11,
            min_level: 3,
            max_level: 9,
            n_paths,
            seed,
            bootstrap: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelStat {
    pub j: u32,
    pub median_abs: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub params: ProcessParams,
    pub options: ScalingOptions,
    pub levels: Vec<LevelStat>,
    /// Least-squares slope of `log₂ median|r_jn|` against `j`.
    pub slope: f64,
    pub intercept: f64,
    /// Percentile bootstrap 95% interval over resampled paths.
    pub slope_ci: (f64, f64),
}

/// Interior positions `2^{j−2} < n ≤ 3·2^{j−2}` as 0-based indices.
fn interior(j: u32) -> std::ops::Range<usize> {
    let q = 1usize << (j - 2);
    q..3 * q
}

fn slope_of(medians: &[f64], levels: &[u32]) -> Result<(f64, f64)> {
    let x: Vec<f64> = levels.iter().map(|&j| j as f64).collect();
    let y: Vec<f64> = medians.iter().map(|m| m.log2()).collect();
    let fit = weighted_line(&x, &y, &vec![1.0; x.len()])?;
    Ok((fit.slope, fit.intercept))
}

fn median_in_place(v: &mut [f64]) -> f64 {
    let mid = v.len() / 2;
    let (_, m, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *m;
    if v.len() % 2 == 1 {
        upper
    } else {
        let lower = v[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    }
}

/// Per-level medians of `|r_jn|` over interior `n` and all paths, with the
/// fitted `log₂` slope against `j` (expected near `−H`).
pub fn coefficient_scaling_report(
    params: &ProcessParams,
    options: &ScalingOptions,
) -> Result<ScalingReport> {
    let o = options;
    if o.grid_level < 6 {
        return invalid(format!("grid level {} < 6: too few levels", o.grid_level));
    }
    if o.min_level < 2 || o.max_level >= o.grid_level || o.max_level < o.min_level + 2 {
        return invalid(format!(
            "need 2 <= min_level, min_level + 2 <= max_level < grid level, got {}..={} on level {}",
            o.min_level, o.max_level, o.grid_level
        ));
    }
    if o.n_paths < 2 {
        return invalid("need at least 2 paths");
    }
    let grid = Grid::unit(o.grid_level);
    let scheme = process_scheme(params, grid, DEFAULT_TAIL_TOLERANCE)?;
    let levels: Vec<u32> = (o.min_level..=o.max_level).collect();
    let cells = grid.cells;
    // per_path[i] holds |r_jn| for interior n, level after level.
    let per_path: Vec<Vec<f64>> = scheme.sampler(o.seed).map(0..o.n_paths as u64, |_, f| {
        let mut out = Vec::new();
        for &j in &levels {
            let w = cells >> j;
            for n in interior(j) {
                out.push((2.0 * f[n * w + w / 2] - f[n * w] - f[(n + 1) * w]).abs());
            }
        }
        out
    });
    let offsets: Vec<usize> = levels
        .iter()
        .scan(0, |acc, &j| {
            let start = *acc;
            *acc += interior(j).len();
            Some(start)
        })
        .collect();
    let medians_for = |paths: &mut dyn Iterator<Item = usize>| -> Vec<f64> {
        let chosen: Vec<usize> = paths.collect();
        levels
            .iter()
            .zip(&offsets)
            .map(|(&j, &off)| {
                let len = interior(j).len();
                let mut pool: Vec<f64> = chosen
                    .iter()
                    .flat_map(|&i| per_path[i][off..off + len].iter().copied())
                    .collect();
                median_in_place(&mut pool)
            })
            .collect()
    };
    let medians = medians_for(&mut (0..o.n_paths));
    let (slope, intercept) = slope_of(&medians, &levels)?;
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed);
    rng.set_stream(u64::MAX);
    let mut boot = Vec::with_capacity(o.bootstrap);
    for _ in 0..o.bootstrap {
        let mut draw = (0..o.n_paths).map(|_| (rng.next_u64() % o.n_paths as u64) as usize);
        let m = medians_for(&mut draw);
        boot.push(slope_of(&m, &levels)?.0);
    }
    boot.sort_by(f64::total_cmp);
    let slope_ci = if boot.is_empty() {
        (slope, slope)
    } else {
        (quantile_sorted(&boot, 0.025), quantile_sorted(&boot, 0.975))
    };
    Ok(ScalingReport {
        params: *params,
        options: *o,
        levels: levels
            .iter()
            .zip(&medians)
            .map(|(&j, &m)| LevelStat {
                j,
                median_abs: m,
                count: interior(j).len() * o.n_paths,
            })
            .collect(),
        slope,
        intercept,
        slope_ci,
    })
}
