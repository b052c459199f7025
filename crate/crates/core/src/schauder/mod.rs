//! Schauder (Faber) analysis of paths on dyadic grids: coefficient
//! extraction, partial reconstruction, coefficient scale factors and their
//! level decay.
//!
//! Coefficients are second differences at dyadic knots,
//! `r_jn = 2f(t¹_jn) − f(t⁰_jn) − f(t²_jn)`, so a path is recovered as
//! `f(0)(1−t) + f(1)t + Σ_j Σ_n (r_jn / 2) ψ_jn(t)`.

mod scaling;
mod sigma;

pub use scaling::{coefficient_scaling_report, LevelStat, ScalingOptions, ScalingReport};
pub use sigma::{sigma_lmp, sigma_rlp, sigma_table, CoefficientScale, ScaleKind};

use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::processes::{Grid, Path};

/// Triangular generator `ψ(t) = 1 − |2t − 1|` on `[0, 1]`, zero outside.
pub fn psi(t: f64) -> f64 {
    if (0.0..=1.0).contains(&t) {
        1.0 - (2.0 * t - 1.0).abs()
    } else {
        0.0
    }
}

/// `ψ_jn(t) = ψ(2^j t − n + 1)`, `1 ≤ n ≤ 2^j`.
pub fn psi_jn(j: u32, n: usize, t: f64) -> f64 {
    psi(2f64.powi(j as i32) * t - n as f64 + 1.0)
}

/// Knots `(t⁰, t¹, t²) = ((n−1)2^{−j}, (n−½)2^{−j}, n2^{−j})`.
pub fn knots(j: u32, n: usize) -> (f64, f64, f64) {
    let w = 2f64.powi(-(j as i32));
    let n = n as f64;
    ((n - 1.0) * w, (n - 0.5) * w, n * w)
}

/// Schauder coefficients of a path sampled on `2^J` cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchauderCoeffs {
    pub grid: Grid,
    /// `f(0)` and `f(T)`: the linear part `f(0)(1−t) + f(T)t`.
    pub left: f64,
    pub right: f64,
    /// `levels[j][n−1] = r_jn` for `0 ≤ j < J`.
    pub levels: Vec<Vec<f64>>,
}

impl SchauderCoeffs {
    pub fn level_count(&self) -> u32 {
        self.levels.len() as u32
    }

    /// `r_jn`, `1 ≤ n ≤ 2^j`.
    pub fn get(&self, j: u32, n: usize) -> Option<f64> {
        self.levels
            .get(j as usize)
            .and_then(|l| l.get(n.checked_sub(1)?))
            .copied()
    }
}

fn dyadic_level(grid: &Grid) -> Result<u32> {
    grid.dyadic_level().ok_or(Error::NonDyadic(grid.cells))
}

/// All coefficients of levels `0..J` of a path on a `2^J`-cell grid.
pub fn decompose(path: &Path) -> Result<SchauderCoeffs> {
    let big_j = dyadic_level(&path.grid)?;
    let f = &path.values;
    let cells = path.grid.cells;
    let levels = (0..big_j)
        .map(|j| {
            let w = cells >> j;
            (0..1usize << j)
                .map(|n| 2.0 * f[n * w + w / 2] - f[n * w] - f[(n + 1) * w])
                .collect()
        })
        .collect();
    Ok(SchauderCoeffs {
        grid: path.grid,
        left: f[0],
        right: f[cells],
        levels,
    })
}

/// Partial sum through level `max_level` evaluated on the coefficient grid.
pub fn reconstruct(coeffs: &SchauderCoeffs, max_level: u32) -> Result<Path> {
    if max_level >= coeffs.level_count() {
        return invalid(format!(
            "level {max_level} not below the {} available levels",
            coeffs.level_count()
        ));
    }
    let cells = coeffs.grid.cells;
    let mut v: Vec<f64> = (0..=cells)
        .map(|i| {
            let t = i as f64 / cells as f64;
            coeffs.left * (1.0 - t) + coeffs.right * t
        })
        .collect();
    for (j, level) in coeffs
        .levels
        .iter()
        .enumerate()
        .take(max_level as usize + 1)
    {
        let w = cells >> j;
        let half = w / 2;
        for (n, &r) in level.iter().enumerate() {
            let start = n * w;
            for i in 1..w {
                let dist = i.abs_diff(half);
                v[start + i] += 0.5 * r * (1.0 - dist as f64 / half as f64);
            }
        }
    }
    Path::new(coeffs.grid, v)
}

/// CSV `j,n,r_jn`.
pub fn write_coeffs_csv<W: Write>(coeffs: &SchauderCoeffs, mut out: W) -> Result<()> {
    writeln!(out, "j,n,r_jn")?;
    for (j, level) in coeffs.levels.iter().enumerate() {
        for (n, r) in level.iter().enumerate() {
            writeln!(out, "{j},{},{r:e}", n + 1)?;
        }
    }
    Ok(())
}

/// Reads `j,n,r_jn` rows back into per-level vectors (linear part zero).
pub fn read_coeffs_csv<R: Read>(input: R, grid: Grid) -> Result<SchauderCoeffs> {
    let big_j = dyadic_level(&grid)?;
    let mut levels: Vec<Vec<f64>> = (0..big_j).map(|j| vec![0.0; 1 << j]).collect();
    let mut lines = BufReader::new(input).lines();
    match lines.next() {
        Some(Ok(h)) if h.trim() == "j,n,r_jn" => {}
        _ => return Err(Error::Format("expected header j,n,r_jn".into())),
    }
    for (k, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = || Error::Format(format!("line {}: '{line}'", k + 2));
        let mut it = line.split(',');
        let j: usize = it
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(bad)?;
        let n: usize = it
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(bad)?;
        let r: f64 = it
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(bad)?;
        let slot = levels
            .get_mut(j)
            .and_then(|l| l.get_mut(n.wrapping_sub(1)))
            .ok_or_else(bad)?;
        *slot = r;
    }
    Ok(SchauderCoeffs {
        grid,
        left: 0.0,
        right: 0.0,
        levels,
    })
}

/// CSV `j,n,sigma`.
pub fn write_sigma_csv<W: Write>(table: &[CoefficientScale], mut out: W) -> Result<()> {
    writeln!(out, "j,n,sigma")?;
    for s in table {
        writeln!(out, "{},{},{:e}", s.j, s.n, s.sigma)?;
    }
    Ok(())
}
