//! Discretized Riemann–Liouville, long-memory, linear fractional stable and
//! well-balanced processes on uniform grids.
//!
//! Every process here is a linear functional of independent SαS increments,
//! so each is represented as a [`Scheme`]: a set of weight blocks mapping
//! unit-scale noise lanes to path values. The same scheme serves single-path
//! simulation and batched Monte Carlo ([`PathSampler`]).

mod io;
mod kernels;
mod scheme;

pub use io::{read_path, read_path_csv, write_path, write_path_csv};
pub use kernels::{
    balanced_scheme, levy_scheme, lmp_scheme, process_scheme, rlp_kernel_weights, rlp_scheme,
    rlp_split, rlp_window_weights, LmpTruncation, DEFAULT_TAIL_TOLERANCE,
};
pub use scheme::{PathSampler, Scheme};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::stable_rng::{NoiseStream, StabilityIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProcessKind {
    Rlp,
    Lmp,
    Lfsm,
    Balanced,
}

impl ProcessKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Rlp => "rlp",
            Self::Lmp => "lmp",
            Self::Lfsm => "lfsm",
            Self::Balanced => "balanced",
        }
    }
}

impl std::str::FromStr for ProcessKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rlp" => Ok(Self::Rlp),
            "lmp" => Ok(Self::Lmp),
            "lfsm" => Ok(Self::Lfsm),
            "balanced" => Ok(Self::Balanced),
            other => invalid(format!("unknown process kind '{other}'")),
        }
    }
}

/// Process selection with its stability index and Hurst parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ProcessParams {
    alpha: StabilityIndex,
    hurst: f64,
    kind: ProcessKind,
    normalize_gaussian: bool,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    kind: ProcessKind,
    alpha: f64,
    hurst: f64,
    #[serde(default)]
    normalize_gaussian: bool,
}

impl TryFrom<RawParams> for ProcessParams {
    type Error = Error;

    fn try_from(r: RawParams) -> Result<Self> {
        ProcessParams::new(r.kind, r.alpha, r.hurst, r.normalize_gaussian)
    }
}

impl From<ProcessParams> for RawParams {
    fn from(p: ProcessParams) -> Self {
        RawParams {
            kind: p.kind,
            alpha: p.alpha.get(),
            hurst: p.hurst,
            normalize_gaussian: p.normalize_gaussian,
        }
    }
}

impl ProcessParams {
    /// Validates the parameter constraints of `kind`.
    ///
    /// * RLP: `H > 0`.
    /// * LMP, LFSM: `α ∈ (1, 2]`, `H ∈ [1/α, 1)`; at `H = 1/α` the LMP kernel
    ///   vanishes and the LFSM reduces to the Lévy process.
    /// * Balanced: `H ∈ (0, 1)`.
    pub fn new(
        kind: ProcessKind,
        alpha: f64,
        hurst: f64,
        normalize_gaussian: bool,
    ) -> Result<Self> {
        let alpha = StabilityIndex::new(alpha)?;
        if !(hurst > 0.0 && hurst.is_finite()) {
            return invalid(format!("H = {hurst} must be positive"));
        }
        let a = alpha.get();
        match kind {
            ProcessKind::Rlp => {}
            ProcessKind::Lmp | ProcessKind::Lfsm => {
                if a <= 1.0 {
                    return invalid(format!("{}: alpha = {a} must exceed 1", kind.as_str()));
                }
                if hurst >= 1.0 {
                    return invalid(format!(
                        "{}: H = {hurst} >= 1, the long-memory integral diverges",
                        kind.as_str()
                    ));
                }
                if hurst < 1.0 / a {
                    return invalid(format!(
                        "{}: H = {hurst} < 1/alpha = {}",
                        kind.as_str(),
                        1.0 / a
                    ));
                }
            }
            ProcessKind::Balanced => {
                if hurst >= 1.0 {
                    return invalid(format!("balanced: H = {hurst} must lie in (0, 1)"));
                }
            }
        }
        Ok(Self {
            alpha,
            hurst,
            kind,
            normalize_gaussian,
        })
    }

    pub fn rlp(alpha: f64, hurst: f64) -> Result<Self> {
        Self::new(ProcessKind::Rlp, alpha, hurst, false)
    }

    pub fn with_kind(self, kind: ProcessKind) -> Result<Self> {
        Self::new(kind, self.alpha.get(), self.hurst, self.normalize_gaussian)
    }

    pub fn normalized(mut self, yes: bool) -> Self {
        self.normalize_gaussian = yes;
        self
    }

    pub fn alpha(&self) -> StabilityIndex {
        self.alpha
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn kind(&self) -> ProcessKind {
        self.kind
    }

    pub fn normalize_gaussian(&self) -> bool {
        self.normalize_gaussian
    }

    /// Kernel exponent `H' = H − 1/α`.
    pub fn h_prime(&self) -> f64 {
        self.hurst - 1.0 / self.alpha.get()
    }

    /// Whether the process has a continuous version (`α = 2` or `H > 1/α`).
    pub fn is_continuous(&self) -> bool {
        self.alpha.is_gaussian() || self.h_prime() > 0.0
    }

    /// Output multiplier: `1/√2` for normalized Gaussian runs, else 1.
    pub fn output_factor(&self) -> f64 {
        if self.normalize_gaussian && self.alpha.is_gaussian() {
            std::f64::consts::FRAC_1_SQRT_2
        } else {
            1.0
        }
    }
}

/// Uniform partition of `[0, horizon]` into `cells` cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub cells: usize,
    pub horizon: f64,
}

/// Default dyadic level for simulations.
pub const DEFAULT_LEVEL: u32 = 10;

impl Grid {
    pub fn uniform(cells: usize, horizon: f64) -> Result<Self> {
        if cells == 0 {
            return invalid("grid needs at least one cell");
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return invalid(format!("horizon {horizon} must be positive"));
        }
        Ok(Self { cells, horizon })
    }

    /// `2^level` cells on `[0, horizon]`.
    pub fn dyadic(level: u32, horizon: f64) -> Result<Self> {
        if level > 24 {
            return invalid(format!("level {level} too large"));
        }
        Self::uniform(1usize << level, horizon)
    }

    pub fn unit(level: u32) -> Self {
        Self {
            cells: 1usize << level,
            horizon: 1.0,
        }
    }

    pub fn step(&self) -> f64 {
        self.horizon / self.cells as f64
    }

    pub fn points(&self) -> usize {
        self.cells + 1
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.horizon / self.cells as f64
    }

    pub fn dyadic_level(&self) -> Option<u32> {
        self.cells
            .is_power_of_two()
            .then(|| self.cells.trailing_zeros())
    }

    /// Grid index of `t`, if `t` is a knot (to relative precision 1e-12).
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let x = t / self.step();
        let k = x.round();
        if k < 0.0 || k > self.cells as f64 || (x - k).abs() > 1e-9 {
            return Err(Error::OffGrid(t));
        }
        Ok(k as usize)
    }

    /// Same sample count, horizon multiplied by `factor`.
    pub fn rescaled(&self, factor: f64) -> Self {
        Self {
            cells: self.cells,
            horizon: self.horizon * factor,
        }
    }
}

/// Sampled trajectory on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub grid: Grid,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ProcessParams>,
}

impl Path {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.points() {
            return invalid(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.points()
            ));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return invalid(format!("non-finite path value {v}"));
        }
        Ok(Self {
            grid,
            values,
            params: None,
        })
    }

    /// Samples `f` at the grid points.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.points()).map(|k| f(grid.time(k))).collect();
        Self {
            grid,
            values,
            params: None,
        }
    }

    pub fn with_params(mut self, params: ProcessParams) -> Self {
        self.params = Some(params);
        self
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.grid.points()).map(|k| self.grid.time(k))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| c * v).collect(),
            params: self.params,
        }
    }

    /// Values at grid indices `[from, to]` as a path on `[0, (to-from)·Δ]`.
    pub fn window(&self, from: usize, to: usize) -> Result<Self> {
        if to <= from || to > self.grid.cells {
            return Err(Error::EmptyInterval);
        }
        let grid = Grid::uniform(to - from, (to - from) as f64 * self.grid.step())?;
        Ok(Self {
            grid,
            values: self.values[from..=to].to_vec(),
            params: None,
        })
    }
}

/// Cumulative sums of i.i.d. SαS increments with scale `Δ^{1/α}`.
pub fn simulate_levy(params: &ProcessParams, grid: Grid, stream: &mut NoiseStream) -> Result<Path> {
    levy_scheme(params, grid).simulate_one(&mut [stream])
}

/// Riemann–Liouville process `R_t = ∫₀ᵗ (t−s)^{H'} dZ_s`.
pub fn simulate_rlp(params: &ProcessParams, grid: Grid, stream: &mut NoiseStream) -> Result<Path> {
    if params.kind() != ProcessKind::Rlp {
        return invalid("simulate_rlp needs kind = rlp");
    }
    rlp_scheme(params, grid).simulate_one(&mut [stream])
}

/// Output of [`simulate_lmp`]: the path with its truncation diagnostics.
#[derive(Debug, Clone)]
pub struct LmpSimulation {
    pub path: Path,
    pub truncation: LmpTruncation,
}

/// Long-memory process `M_t = ∫₀^∞ ((t+s)^{H'} − s^{H'}) dZ̃_s`, truncated at
/// `S` where the neglected tail has α-scale below `tail_tolerance`.
pub fn simulate_lmp(
    params: &ProcessParams,
    grid: Grid,
    stream: &mut NoiseStream,
    tail_tolerance: f64,
) -> Result<LmpSimulation> {
    if params.kind() != ProcessKind::Lmp {
        return invalid("simulate_lmp needs kind = lmp");
    }
    let (scheme, truncation) = lmp_scheme(params, grid, tail_tolerance)?;
    let path = scheme.simulate_one(&mut [stream])?;
    Ok(LmpSimulation { path, truncation })
}

/// Independent components of a linear fractional stable motion.
#[derive(Debug, Clone)]
pub struct LfsmComponents {
    pub rlp: Path,
    pub lmp: Path,
    pub total: Path,
}

/// LFSM `X = R + M` from two independent streams, keeping both parts.
pub fn simulate_lfsm_components(
    params: &ProcessParams,
    grid: Grid,
    stream_r: &mut NoiseStream,
    stream_m: &mut NoiseStream,
) -> Result<LfsmComponents> {
    if params.kind() != ProcessKind::Lfsm {
        return invalid("simulate_lfsm needs kind = lfsm");
    }
    if stream_r.master_seed == stream_m.master_seed && stream_r.stream_id == stream_m.stream_id {
        return invalid("LFSM components need disjoint streams");
    }
    let rlp =
        rlp_scheme(&params.with_kind(ProcessKind::Rlp)?, grid).simulate_one(&mut [stream_r])?;
    let (m_scheme, _) = lmp_scheme(
        &params.with_kind(ProcessKind::Lmp)?,
        grid,
        DEFAULT_TAIL_TOLERANCE,
    )?;
    let lmp = m_scheme.simulate_one(&mut [stream_m])?;
    let values = rlp
        .values
        .iter()
        .zip(&lmp.values)
        .map(|(r, m)| r + m)
        .collect();
    let total = Path::new(grid, values)?.with_params(*params);
    Ok(LfsmComponents { rlp, lmp, total })
}

pub fn simulate_lfsm(
    params: &ProcessParams,
    grid: Grid,
    stream_r: &mut NoiseStream,
    stream_m: &mut NoiseStream,
) -> Result<Path> {
    Ok(simulate_lfsm_components(params, grid, stream_r, stream_m)?.total)
}

/// Well-balanced process `∫_ℝ (|t+s|^{H'} − |s|^{H'}) dZ(s)`. The stream
/// drives the half-line `s > 0`; `negative` drives `s < 0`.
pub fn simulate_balanced(
    params: &ProcessParams,
    grid: Grid,
    positive: &mut NoiseStream,
    negative: &mut NoiseStream,
) -> Result<Path> {
    if params.kind() != ProcessKind::Balanced {
        return invalid("simulate_balanced needs kind = balanced");
    }
    let (scheme, _) = balanced_scheme(params, grid, DEFAULT_TAIL_TOLERANCE)?;
    scheme.simulate_one(&mut [positive, negative])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_validation() {
        assert!(ProcessParams::rlp(1.5, 0.0).is_err());
        assert!(ProcessParams::rlp(1.5, 3.0).is_ok());
        assert!(ProcessParams::new(ProcessKind::Lmp, 1.0, 0.9, false).is_err());
        assert!(ProcessParams::new(ProcessKind::Lmp, 1.5, 1.0, false).is_err());
        assert!(ProcessParams::new(ProcessKind::Lmp, 1.5, 0.6, false).is_err());
        assert!(ProcessParams::new(ProcessKind::Lfsm, 2.0, 0.75, false).is_ok());
        assert!(ProcessParams::new(ProcessKind::Balanced, 1.5, 1.2, false).is_err());
        let p = ProcessParams::new(ProcessKind::Lfsm, 1.5, 0.9, false).unwrap();
        assert!((p.h_prime() - (0.9 - 1.0 / 1.5)).abs() < 1e-15);
        assert!(p.h_prime() > -1.0 && p.h_prime() < 1.0);
    }

    #[test]
    fn grid_indexing() {
        let g = Grid::unit(4);
        assert_eq!(g.index_of(0.25).unwrap(), 4);
        assert!(matches!(g.index_of(0.3), Err(Error::OffGrid(_))));
        assert_eq!(g.dyadic_level(), Some(4));
        assert_eq!(Grid::uniform(3, 1.0).unwrap().dyadic_level(), None);
    }

    #[test]
    fn params_serde_validates() {
        let ok: ProcessParams =
            serde_json::from_str(r#"{"kind":"rlp","alpha":1.5,"hurst":0.9}"#).unwrap();
        assert_eq!(ok.kind(), ProcessKind::Rlp);
        assert!(
            serde_json::from_str::<ProcessParams>(r#"{"kind":"lmp","alpha":2,"hurst":1.2}"#)
                .is_err()
        );
    }
}
