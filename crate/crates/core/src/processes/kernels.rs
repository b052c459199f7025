//! Weight construction for the discretized stochastic integrals.
//!
//! Each cell `[a, b]` of a quadrature mesh contributes `k(t, s*)·ξ` with
//! `ξ ~ SαS((b−a)^{1/α})`. Cells touching a singularity of an `s^{H'}` factor
//! (`H' < 0`) use the α-average `((b−a)⁻¹∫ s^{αH'} ds)^{1/α}` of that factor
//! instead of its midpoint value, which keeps the cell's stable scale exact.
//!
//! The half-line integrals are split at `2T`. Below it a graded (LMP) or
//! uniform (balanced, negative side) mesh is stored densely. Above it the
//! kernel is expanded as `(s ± t)^{H'} − s^{H'} = Σ_{m≥1} C(H',m) (±t)^m s^{H'−m}`
//! with `t/s ≤ 1/2`, which makes the far block low rank.

use serde::{Deserialize, Serialize};

use super::scheme::{Block, BlockOp, Input, Scheme};
use super::{Grid, ProcessKind, ProcessParams};
use crate::error::{invalid, Result};

/// Default bound on the α-scale of the neglected far tail.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-4;

const FAR_RATIO: f64 = 1.05;
const MAX_RANK: usize = 64;
/// Largest admissible `ln S`; beyond it the tolerance cannot be met in f64.
const MAX_LOG_TRUNCATION: f64 = 600.0;

const LANE_MAIN: u64 = 0;
const LANE_LMP: u64 = 1;
const LANE_NEGATIVE: u64 = 2;

/// Truncation diagnostics of a half-line integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmpTruncation {
    /// Upper integration limit `S`.
    pub truncation: f64,
    /// A-priori bound on the α-scale of `∫_S^∞ k(T, s) dZ_s`.
    pub tail_scale_bound: f64,
    pub tolerance: f64,
    pub near_cells: usize,
    pub far_cells: usize,
}

/// `((len⁻¹ ∫₀^len u^{αν} du)^{1/α}`, the α-average of `u^ν` over `[0, len]`.
fn alpha_average_power(nu: f64, alpha: f64, len: f64) -> f64 {
    len.powf(nu) * (1.0 + alpha * nu).powf(-1.0 / alpha)
}

fn is_zero_exponent(hp: f64) -> bool {
    hp.abs() < 1e-14
}

pub fn levy_scheme(params: &ProcessParams, grid: Grid) -> Scheme {
    let alpha = params.alpha().get();
    Scheme {
        params: *params,
        grid,
        factor: params.output_factor(),
        inputs: vec![Input {
            lane: LANE_MAIN,
            count: grid.cells,
        }],
        blocks: vec![Block {
            input: 0,
            offset: 0,
            cols: grid.cells,
            op: BlockOp::CumSum {
                scale: grid.step().powf(1.0 / alpha),
            },
        }],
    }
}

/// Lag weights `w_m`, `m = 1..N`: the noise of cell `i` enters `R_{t_k}` with
/// weight `w_{k−i}`. Includes the cell scale `Δ^{1/α}`.
pub fn rlp_kernel_weights(params: &ProcessParams, grid: Grid) -> Vec<f64> {
    let alpha = params.alpha().get();
    let hp = params.h_prime();
    let dt = grid.step();
    let cell_scale = dt.powf(1.0 / alpha);
    (1..=grid.cells)
        .map(|m| {
            let k = if m == 1 && hp < 0.0 {
                alpha_average_power(hp, alpha, dt)
            } else {
                ((m as f64 - 0.5) * dt).powf(hp)
            };
            k * cell_scale
        })
        .collect()
}

/// Weights of cells `start..end` in the increment `R_{a,a+t}` with
/// `a = t_start`, `a + t = t_end`. They coincide with the weights of `R_t`
/// over `[0, t]`.
pub fn rlp_window_weights(
    params: &ProcessParams,
    grid: Grid,
    start: usize,
    end: usize,
) -> Result<Vec<f64>> {
    if end <= start || end > grid.cells {
        return invalid(format!("window {start}..{end} outside 0..{}", grid.cells));
    }
    let w = rlp_kernel_weights(params, grid);
    Ok((start..end).map(|i| w[end - i - 1]).collect())
}

/// Splits `R_{a+t} = R_{a,a+t} + R̃_{a,t}` for `a = t_a` given the unit-scale
/// increments `ξ`. Returns `(local, memory)` indexed by `k = 0..=N−a`;
/// `local` uses only `ξ_i, i ≥ a` and `memory` only `ξ_i, i < a`.
pub fn rlp_split(
    params: &ProcessParams,
    grid: Grid,
    a: usize,
    increments: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    if increments.len() != grid.cells {
        return invalid(format!(
            "{} increments for {} cells",
            increments.len(),
            grid.cells
        ));
    }
    if a > grid.cells {
        return invalid(format!("split point {a} beyond {} cells", grid.cells));
    }
    let w = rlp_kernel_weights(params, grid);
    let factor = params.output_factor();
    let len = grid.cells - a;
    let mut local = vec![0.0; len + 1];
    let mut memory = vec![0.0; len + 1];
    for k in 0..=len {
        let t = a + k;
        local[k] = factor * (a..t).map(|i| w[t - i - 1] * increments[i]).sum::<f64>();
        memory[k] = factor * (0..a).map(|i| w[t - i - 1] * increments[i]).sum::<f64>();
    }
    Ok((local, memory))
}

pub fn rlp_scheme(params: &ProcessParams, grid: Grid) -> Scheme {
    if is_zero_exponent(params.h_prime()) {
        return levy_scheme(params, grid);
    }
    let n = grid.cells;
    let rows = grid.points();
    let w = rlp_kernel_weights(params, grid);
    let mut weights = vec![0.0; rows * n];
    for k in 1..rows {
        let row = &mut weights[k * n..(k + 1) * n];
        for i in 0..k {
            row[i] = w[k - i - 1];
        }
    }
    Scheme {
        params: *params,
        grid,
        factor: params.output_factor(),
        inputs: vec![Input {
            lane: LANE_MAIN,
            count: n,
        }],
        blocks: vec![Block {
            input: 0,
            offset: 0,
            cols: n,
            op: BlockOp::Dense { weights },
        }],
    }
}

/// Truncation point for kernels behaving like `|H'| t s^{H'−1}` at large `s`.
fn truncation(params: &ProcessParams, horizon: f64, tol: f64) -> Result<(f64, f64)> {
    if !(tol > 0.0 && tol.is_finite()) {
        return invalid(format!("tail tolerance {tol} must be positive"));
    }
    let alpha = params.alpha().get();
    let hp = params.h_prime();
    let e = alpha * (1.0 - params.hurst());
    if e <= 0.0 {
        return invalid("half-line kernel integral diverges for H >= 1");
    }
    let log_s = (alpha * hp.abs().ln() + alpha * horizon.ln() - e.ln() - alpha * tol.ln()) / e;
    let s = log_s.min(MAX_LOG_TRUNCATION).exp().max(4.0 * horizon);
    let bound = (hp.abs().powf(alpha) * horizon.powf(alpha) * s.powf(-e) / e).powf(1.0 / alpha);
    Ok((s, bound))
}

/// Generalized binomial coefficients `C(ν, m)`, `m = 1..`, truncated where
/// `|C(ν, m)| 2^{-m}` is negligible.
fn binomials(nu: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut b = nu;
    for m in 1..=MAX_RANK {
        out.push(b);
        if (b * 0.5f64.powi(m as i32)).abs() < 1e-17 * nu.abs() {
            break;
        }
        b *= (nu - m as f64) / (m + 1) as f64;
    }
    out
}

/// Geometric mesh `[s0, s]` as `(midpoint, width)` pairs.
fn geometric_cells(s0: f64, s: f64) -> Vec<(f64, f64)> {
    let count = ((s / s0).ln() / FAR_RATIO.ln()).ceil().max(1.0) as usize;
    let ratio = (s / s0).powf(1.0 / count as f64);
    let mut lo = s0;
    (0..count)
        .map(|c| {
            let hi = if c + 1 == count { s } else { lo * ratio };
            let cell = (0.5 * (lo + hi), hi - lo);
            lo = hi;
            cell
        })
        .collect()
}

/// Low-rank block for `(s + sign·t)^{H'} − s^{H'}` over far cells.
#[allow(clippy::too_many_arguments)]
fn far_block(
    grid: Grid,
    hp: f64,
    alpha: f64,
    sign: f64,
    s0: f64,
    cells: &[(f64, f64)],
    input: usize,
    offset: usize,
) -> Block {
    let binom = binomials(hp);
    let rank = binom.len();
    let rows = grid.points();
    let mut left = vec![0.0; rows * rank];
    for k in 0..rows {
        let x = sign * grid.time(k) / s0;
        let mut xm = 1.0;
        for r in 0..rank {
            xm *= x;
            left[k * rank + r] = binom[r] * xm;
        }
    }
    let cols = cells.len();
    let mut right = vec![0.0; rank * cols];
    for (c, &(mid, width)) in cells.iter().enumerate() {
        let base = mid.powf(hp) * width.powf(1.0 / alpha);
        let q = s0 / mid;
        let mut qm = 1.0;
        for r in 0..rank {
            qm *= q;
            right[r * cols + c] = base * qm;
        }
    }
    Block {
        input,
        offset,
        cols,
        op: BlockOp::LowRank { rank, left, right },
    }
}

/// Dense block `W[k][c] = kernel(t_k, c)·width_c^{1/α}`, row 0 zero.
fn dense_block(
    grid: Grid,
    alpha: f64,
    widths: &[f64],
    kernel: impl Fn(f64, usize) -> f64,
    input: usize,
) -> Block {
    let cols = widths.len();
    let rows = grid.points();
    let scales: Vec<f64> = widths.iter().map(|w| w.powf(1.0 / alpha)).collect();
    let mut weights = vec![0.0; rows * cols];
    for k in 1..rows {
        let t = grid.time(k);
        for c in 0..cols {
            weights[k * cols + c] = kernel(t, c) * scales[c];
        }
    }
    Block {
        input,
        offset: 0,
        cols,
        op: BlockOp::Dense { weights },
    }
}

/// Graded mesh `s_i = s0 (i/m)²` on `[0, s0]` as `(midpoint, width)` pairs.
fn graded_cells(s0: f64, m: usize) -> Vec<(f64, f64)> {
    (0..m)
        .map(|i| {
            let lo = s0 * (i as f64 / m as f64).powi(2);
            let hi = s0 * ((i + 1) as f64 / m as f64).powi(2);
            (0.5 * (lo + hi), hi - lo)
        })
        .collect()
}

/// Blocks for `∫₀^S ((t+s)^{H'} − s^{H'}) dZ_s` on noise input `input`.
fn positive_side(
    params: &ProcessParams,
    grid: Grid,
    s_max: f64,
    input: usize,
) -> (Vec<Block>, usize, usize) {
    let alpha = params.alpha().get();
    let hp = params.h_prime();
    let s0 = 2.0 * grid.horizon;
    let near = graded_cells(s0, grid.cells);
    let first_avg = alpha_average_power(hp, alpha, near[0].1);
    let widths: Vec<f64> = near.iter().map(|c| c.1).collect();
    let near_block = dense_block(
        grid,
        alpha,
        &widths,
        |t, c| {
            let s = near[c].0;
            let sub = if c == 0 && hp < 0.0 {
                first_avg
            } else {
                s.powf(hp)
            };
            (t + s).powf(hp) - sub
        },
        input,
    );
    let far = geometric_cells(s0, s_max);
    let far_block = far_block(grid, hp, alpha, 1.0, s0, &far, input, near.len());
    (vec![near_block, far_block], near.len(), far.len())
}

/// Long-memory process on lane 1.
pub fn lmp_scheme(
    params: &ProcessParams,
    grid: Grid,
    tail_tolerance: f64,
) -> Result<(Scheme, LmpTruncation)> {
    if params.kind() != ProcessKind::Lmp {
        return invalid("lmp scheme needs kind = lmp");
    }
    let hp = params.h_prime();
    let mut scheme = Scheme {
        params: *params,
        grid,
        factor: params.output_factor(),
        inputs: vec![Input {
            lane: LANE_LMP,
            count: 0,
        }],
        blocks: Vec::new(),
    };
    if is_zero_exponent(hp) {
        // (t+s)^0 − s^0 = 0: the process vanishes identically.
        let trunc = LmpTruncation {
            truncation: 0.0,
            tail_scale_bound: 0.0,
            tolerance: tail_tolerance,
            near_cells: 0,
            far_cells: 0,
        };
        return Ok((scheme, trunc));
    }
    let (s_max, bound) = truncation(params, grid.horizon, tail_tolerance)?;
    let (blocks, near_cells, far_cells) = positive_side(params, grid, s_max, 0);
    scheme.inputs[0].count = near_cells + far_cells;
    scheme.blocks = blocks;
    Ok((
        scheme,
        LmpTruncation {
            truncation: s_max,
            tail_scale_bound: bound,
            tolerance: tail_tolerance,
            near_cells,
            far_cells,
        },
    ))
}

/// Well-balanced process: the half-line `s > 0` on lane 0, `s < 0` on lane 2.
///
/// At `H = 1/α` the kernel `|t+s|⁰ − |s|⁰` vanishes literally; the process is
/// then taken as its indicator limit, a Lévy process driven by lane 2.
pub fn balanced_scheme(
    params: &ProcessParams,
    grid: Grid,
    tail_tolerance: f64,
) -> Result<(Scheme, LmpTruncation)> {
    if params.kind() != ProcessKind::Balanced {
        return invalid("balanced scheme needs kind = balanced");
    }
    let alpha = params.alpha().get();
    let hp = params.h_prime();
    let n = grid.cells;
    if is_zero_exponent(hp) {
        let mut scheme = levy_scheme(params, grid);
        scheme.inputs = vec![
            Input {
                lane: LANE_MAIN,
                count: 0,
            },
            Input {
                lane: LANE_NEGATIVE,
                count: n,
            },
        ];
        scheme.blocks[0].input = 1;
        let trunc = LmpTruncation {
            truncation: 0.0,
            tail_scale_bound: 0.0,
            tolerance: tail_tolerance,
            near_cells: 0,
            far_cells: 0,
        };
        return Ok((scheme, trunc));
    }
    let (s_max, bound) = truncation(params, grid.horizon, tail_tolerance)?;
    let (mut blocks, pos_near, pos_far) = positive_side(params, grid, s_max, 0);

    // Negative side u = −s ∈ (0, 2T]: kernel |t − u|^{H'} − u^{H'} on half cells.
    let s0 = 2.0 * grid.horizon;
    let half = 0.5 * grid.step();
    let m = 4 * n;
    let widths = vec![half; m];
    let avg = alpha_average_power(hp, alpha, half);
    let neg_near = dense_block(
        grid,
        alpha,
        &widths,
        |t, c| {
            let u = (c as f64 + 0.5) * half;
            // Cells c = 2k−1, 2k touch u = t_k.
            let k = (t / grid.step()).round() as usize;
            let near_t = hp < 0.0 && (c + 1 == 2 * k || c == 2 * k);
            let near_zero = hp < 0.0 && c == 0;
            let first = if near_t { avg } else { (t - u).abs().powf(hp) };
            let second = if near_zero { avg } else { u.powf(hp) };
            first - second
        },
        1,
    );
    blocks.push(neg_near);
    let far = geometric_cells(s0, s_max);
    blocks.push(far_block(grid, hp, alpha, -1.0, s0, &far, 1, m));
    let scheme = Scheme {
        params: *params,
        grid,
        factor: params.output_factor(),
        inputs: vec![
            Input {
                lane: LANE_MAIN,
                count: pos_near + pos_far,
            },
            Input {
                lane: LANE_NEGATIVE,
                count: m + far.len(),
            },
        ],
        blocks,
    };
    Ok((
        scheme,
        LmpTruncation {
            truncation: s_max,
            tail_scale_bound: bound,
            tolerance: tail_tolerance,
            near_cells: pos_near + m,
            far_cells: pos_far + far.len(),
        },
    ))
}

/// Scheme of any process kind. LFSM joins the RLP (lane 0) and LMP (lane 1)
/// blocks of the same path index into one map.
pub fn process_scheme(params: &ProcessParams, grid: Grid, tail_tolerance: f64) -> Result<Scheme> {
    match params.kind() {
        ProcessKind::Rlp => Ok(rlp_scheme(params, grid)),
        ProcessKind::Lmp => Ok(lmp_scheme(params, grid, tail_tolerance)?.0),
        ProcessKind::Balanced => Ok(balanced_scheme(params, grid, tail_tolerance)?.0),
        ProcessKind::Lfsm => {
            let mut r = rlp_scheme(&params.with_kind(ProcessKind::Rlp)?, grid);
            let (m, _) = lmp_scheme(&params.with_kind(ProcessKind::Lmp)?, grid, tail_tolerance)?;
            debug_assert_eq!(r.factor, m.factor);
            let shift = r.inputs.len();
            r.inputs.extend(m.inputs);
            r.blocks.extend(m.blocks.into_iter().map(|mut b| {
                b.input += shift;
                b
            }));
            r.params = *params;
            Ok(r)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(kind: ProcessKind, a: f64, h: f64) -> ProcessParams {
        ProcessParams::new(kind, a, h, false).unwrap()
    }

    #[test]
    fn binomial_expansion_matches_power() {
        let hp = 0.25;
        let b = binomials(hp);
        for x in [0.5f64, -0.5, 0.1, -0.3] {
            let series: f64 = b
                .iter()
                .enumerate()
                .map(|(i, c)| c * x.powi(i as i32 + 1))
                .sum();
            let exact = (1.0 + x).powf(hp) - 1.0;
            assert!((series - exact).abs() < 1e-14, "x={x}: {series} vs {exact}");
        }
    }

    #[test]
    fn low_rank_far_block_matches_direct_kernel() {
        let p = params(ProcessKind::Lmp, 1.5, 0.9);
        let grid = Grid::unit(3);
        let hp = p.h_prime();
        let cells = geometric_cells(2.0, 50.0);
        let blk = far_block(grid, hp, 1.5, 1.0, 2.0, &cells, 0, 0);
        let BlockOp::LowRank { rank, left, right } = blk.op else {
            panic!("expected low rank")
        };
        for k in 0..grid.points() {
            let t = grid.time(k);
            for (c, &(s, w)) in cells.iter().enumerate() {
                let lr: f64 = (0..rank)
                    .map(|r| left[k * rank + r] * right[r * cells.len() + c])
                    .sum();
                let direct = ((t + s).powf(hp) - s.powf(hp)) * w.powf(1.0 / 1.5);
                assert!((lr - direct).abs() < 1e-13 * (1.0 + direct.abs()));
            }
        }
    }

    #[test]
    fn geometric_cells_tile_interval() {
        let cells = geometric_cells(2.0, 1e6);
        let total: f64 = cells.iter().map(|c| c.1).sum();
        assert!((total - (1e6 - 2.0)).abs() < 1e-6);
    }

    #[test]
    fn truncation_meets_tolerance() {
        let p = params(ProcessKind::Lmp, 2.0, 0.75);
        let (s, bound) = truncation(&p, 1.0, 1e-4).unwrap();
        assert!(s > 4.0);
        assert!((bound - 1e-4).abs() < 1e-10);
    }

    #[test]
    fn window_weights_match_origin_weights() {
        let p = ProcessParams::rlp(1.5, 0.9).unwrap();
        let g = Grid::unit(6);
        for (a, t) in [(5usize, 10usize), (32, 32), (0, 64)] {
            let shifted = rlp_window_weights(&p, g, a, a + t).unwrap();
            let origin = rlp_window_weights(&p, g, 0, t).unwrap();
            assert_eq!(shifted, origin);
        }
    }

    #[test]
    fn split_uses_disjoint_increments() {
        let p = ProcessParams::rlp(1.5, 0.5).unwrap();
        let g = Grid::unit(5);
        let xi: Vec<f64> = (0..32).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
        let a = 11;
        let (local, memory) = rlp_split(&p, g, a, &xi).unwrap();
        let mut before = xi.clone();
        before[..a].iter_mut().for_each(|v| *v *= -3.0);
        let mut after = xi.clone();
        after[a..].iter_mut().for_each(|v| *v += 1.0);
        assert_eq!(rlp_split(&p, g, a, &before).unwrap().0, local);
        assert_eq!(rlp_split(&p, g, a, &after).unwrap().1, memory);
        let w = rlp_kernel_weights(&p, g);
        for k in 0..local.len() {
            let t = a + k;
            let full: f64 = (0..t).map(|i| w[t - i - 1] * xi[i]).sum();
            assert!((full - local[k] - memory[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_cell_uses_alpha_average() {
        let p = ProcessParams::rlp(1.5, 0.4).unwrap();
        let g = Grid::unit(4);
        let w = rlp_kernel_weights(&p, g);
        let dt: f64 = 1.0 / 16.0;
        let hp = p.h_prime();
        let expect = (dt.powf(1.5 * hp + 1.0) / (1.5 * hp + 1.0) / dt).powf(1.0 / 1.5);
        assert!((w[0] / dt.powf(1.0 / 1.5) - expect).abs() < 1e-12);
    }
}
