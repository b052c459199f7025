use std::ops::Range;

use rayon::prelude::*;

use super::{Grid, Path, ProcessParams};
use crate::error::{invalid, Result};
use crate::stable_rng::NoiseStream;

/// How a block maps its noise columns to path values.
#[derive(Debug, Clone)]
pub(crate) enum BlockOp {
    /// `value[k] = scale · Σ_{i<k} y_i` over `points - 1` columns.
    CumSum { scale: f64 },
    /// Row-major `points × cols` weights.
    Dense { weights: Vec<f64> },
    /// `left (points × rank) · right (rank × cols)`, both row-major.
    LowRank {
        rank: usize,
        left: Vec<f64>,
        right: Vec<f64>,
    },
}

#[derive(Debug, Clone)]
pub(crate) struct Block {
    pub input: usize,
    pub offset: usize,
    pub cols: usize,
    pub op: BlockOp,
}

/// One independent noise input: `count` unit SαS draws from `lane`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Input {
    pub lane: u64,
    pub count: usize,
}

/// Linear map from independent unit-scale SαS noise to path values.
#[derive(Debug, Clone)]
pub struct Scheme {
    pub(crate) params: ProcessParams,
    pub(crate) grid: Grid,
    pub(crate) factor: f64,
    pub(crate) inputs: Vec<Input>,
    pub(crate) blocks: Vec<Block>,
}

impl Scheme {
    pub fn params(&self) -> &ProcessParams {
        &self.params
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Total noise draws per path.
    pub fn noise_len(&self) -> usize {
        self.inputs.iter().map(|i| i.count).sum()
    }

    /// Noise lanes consumed, in the order `simulate_one` expects its streams.
    pub fn lanes(&self) -> Vec<u64> {
        self.inputs.iter().map(|i| i.lane).collect()
    }

    /// Simulates one path, drawing input `i` from `streams[i]`.
    pub fn simulate_one(&self, streams: &mut [&mut NoiseStream]) -> Result<Path> {
        if streams.len() != self.inputs.len() {
            return invalid(format!(
                "scheme needs {} noise streams, got {}",
                self.inputs.len(),
                streams.len()
            ));
        }
        let alpha = self.params.alpha();
        let noise: Vec<Vec<f64>> = self
            .inputs
            .iter()
            .zip(streams.iter_mut())
            .map(|(inp, s)| {
                let mut v = vec![0.0; inp.count];
                s.fill_standard(alpha, &mut v);
                v
            })
            .collect();
        let mut out = vec![0.0; self.grid.points()];
        self.apply(&noise, 1, &mut out);
        Path::new(self.grid, out).map(|p| p.with_params(self.params))
    }

    /// Applies the scheme to `batch` paths. `noise[i]` is `batch × count_i`
    /// row-major; `out` is `batch × points` row-major and is overwritten.
    pub(crate) fn apply(&self, noise: &[Vec<f64>], batch: usize, out: &mut [f64]) {
        let rows = self.grid.points();
        debug_assert_eq!(out.len(), batch * rows);
        out.iter_mut().for_each(|v| *v = 0.0);
        for block in &self.blocks {
            let stride = self.inputs[block.input].count;
            let y = &noise[block.input];
            match &block.op {
                BlockOp::CumSum { scale } => {
                    for b in 0..batch {
                        let src = &y[b * stride + block.offset..][..block.cols];
                        let dst = &mut out[b * rows..(b + 1) * rows];
                        let mut acc = 0.0;
                        for (k, &v) in src.iter().enumerate() {
                            acc += v;
                            dst[k + 1] += scale * acc;
                        }
                    }
                }
                BlockOp::Dense { weights } => unsafe {
                    // out (batch × rows) += Y (batch × cols) · Wᵀ
                    matrixmultiply::dgemm(
                        batch,
                        block.cols,
                        rows,
                        1.0,
                        y.as_ptr().add(block.offset),
                        stride as isize,
                        1,
                        weights.as_ptr(),
                        1,
                        block.cols as isize,
                        1.0,
                        out.as_mut_ptr(),
                        rows as isize,
                        1,
                    );
                },
                BlockOp::LowRank { rank, left, right } => {
                    let mut z = vec![0.0; batch * rank];
                    unsafe {
                        matrixmultiply::dgemm(
                            batch,
                            block.cols,
                            *rank,
                            1.0,
                            y.as_ptr().add(block.offset),
                            stride as isize,
                            1,
                            right.as_ptr(),
                            1,
                            block.cols as isize,
                            0.0,
                            z.as_mut_ptr(),
                            *rank as isize,
                            1,
                        );
                        matrixmultiply::dgemm(
                            batch,
                            *rank,
                            rows,
                            1.0,
                            z.as_ptr(),
                            *rank as isize,
                            1,
                            left.as_ptr(),
                            1,
                            *rank as isize,
                            1.0,
                            out.as_mut_ptr(),
                            rows as isize,
                            1,
                        );
                    }
                }
            }
        }
        if self.factor != 1.0 {
            out.iter_mut().for_each(|v| *v *= self.factor);
        }
        // Exact zero start for processes defined with X₀ = 0.
        for b in 0..batch {
            out[b * rows] = 0.0;
        }
    }

    pub fn sampler(&self, master_seed: u64) -> PathSampler<'_> {
        PathSampler {
            scheme: self,
            master_seed,
            batch: DEFAULT_BATCH,
        }
    }
}

const DEFAULT_BATCH: usize = 64;

/// Batched, order-deterministic Monte Carlo over path indices.
///
/// Path `i` draws lane `ℓ` from `NoiseStream::for_path(seed, i, ℓ)`. Batches
/// are fixed blocks of consecutive indices, so results do not depend on how
/// many worker threads process them.
pub struct PathSampler<'a> {
    scheme: &'a Scheme,
    master_seed: u64,
    batch: usize,
}

impl PathSampler<'_> {
    pub fn with_batch(mut self, batch: usize) -> Self {
        self.batch = batch.max(1);
        self
    }

    /// Evaluates `f(index, values)` on every path in `indices`, in index order.
    pub fn map<T, F>(&self, indices: Range<u64>, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64, &[f64]) -> T + Sync,
    {
        let starts: Vec<u64> = indices.clone().step_by(self.batch).collect();
        let chunks: Vec<Vec<T>> = starts
            .par_iter()
            .map(|&start| {
                let end = (start + self.batch as u64).min(indices.end);
                self.run_batch(start..end, &f)
            })
            .collect();
        chunks.into_iter().flatten().collect()
    }

    fn run_batch<T, F>(&self, range: Range<u64>, f: &F) -> Vec<T>
    where
        F: Fn(u64, &[f64]) -> T,
    {
        let batch = (range.end - range.start) as usize;
        let alpha = self.scheme.params.alpha();
        let noise: Vec<Vec<f64>> = self
            .scheme
            .inputs
            .iter()
            .map(|inp| {
                let mut v = vec![0.0; batch * inp.count];
                if inp.count > 0 {
                    for (b, chunk) in v.chunks_exact_mut(inp.count).enumerate() {
                        let mut s = NoiseStream::for_path(
                            self.master_seed,
                            range.start + b as u64,
                            inp.lane,
                        );
                        s.fill_standard(alpha, chunk);
                    }
                }
                v
            })
            .collect();
        let rows = self.scheme.grid.points();
        let mut out = vec![0.0; batch * rows];
        self.scheme.apply(&noise, batch, &mut out);
        out.chunks_exact(rows)
            .enumerate()
            .map(|(b, vals)| f(range.start + b as u64, vals))
            .collect()
    }

    /// Materializes the paths for `indices`.
    pub fn paths(&self, indices: Range<u64>) -> Vec<Path> {
        let grid = self.scheme.grid;
        let params = self.scheme.params;
        self.map(indices, |_, v| Path {
            grid,
            values: v.to_vec(),
            params: Some(params),
        })
    }
}
