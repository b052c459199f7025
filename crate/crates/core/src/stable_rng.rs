//! Symmetric α-stable variates on counter-based streams.
//!
//! The law is fixed by its characteristic function `E[exp(iλY)] = exp(-scale^α |λ|^α)`.
//! At `α = 2` this is a centered Gaussian with variance `2·scale²`, not `scale²`:
//! every comparison against a standard-normal oracle has to account for the
//! factor `√2` (see [`crate::processes::ProcessParams::normalize_gaussian`]).
//!
//! Draw `k` of stream `s` under master seed `m` is a pure function of
//! `(m, s, k)`. Each draw consumes exactly two 64-bit words of a ChaCha8
//! keystream keyed by `m` with nonce `s`, so streams can be split across
//! threads freely and still reproduce bit-for-bit.

use std::f64::consts::PI;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Stability index `α ∈ (0, 2]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct StabilityIndex(f64);

impl StabilityIndex {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return invalid(format!("alpha = {alpha} must lie in (0, 2]"));
        }
        Ok(Self(alpha))
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn is_gaussian(self) -> bool {
        self.0 == 2.0
    }
}

impl TryFrom<f64> for StabilityIndex {
    type Error = Error;

    fn try_from(alpha: f64) -> Result<Self> {
        Self::new(alpha)
    }
}

impl From<StabilityIndex> for f64 {
    fn from(a: StabilityIndex) -> f64 {
        a.0
    }
}

/// Position in a deterministic noise stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoiseStream {
    pub master_seed: u64,
    pub stream_id: u64,
    pub position: u64,
}

/// Number of independent lanes reserved per path index by [`NoiseStream::for_path`].
pub const LANES_PER_PATH: u64 = 4;

impl NoiseStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
            position: 0,
        }
    }

    /// Stream for lane `lane` (< [`LANES_PER_PATH`]) of path `index`.
    ///
    /// Lane 0 drives RLP/Lévy increments, lane 1 the LMP noise, lane 2 the
    /// negative half-line of the balanced process, lane 3 auxiliary uniforms.
    pub fn for_path(master_seed: u64, index: u64, lane: u64) -> Self {
        debug_assert!(lane < LANES_PER_PATH);
        Self::new(master_seed, index * LANES_PER_PATH + lane)
    }

    fn rng_at(&self, position: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(expand_seed(self.master_seed));
        rng.set_stream(self.stream_id);
        rng.set_word_pos(u128::from(position) * 4);
        rng
    }

    /// Fills `out` with standard (unit-scale) SαS draws and advances the stream.
    pub fn fill_standard(&mut self, alpha: StabilityIndex, out: &mut [f64]) {
        let mut rng = self.rng_at(self.position);
        let a = alpha.get();
        for y in out.iter_mut() {
            let u1 = open_unit(rng.next_u64());
            let u2 = open_unit(rng.next_u64());
            *y = standard_sas(a, u1, u2);
        }
        self.position += out.len() as u64;
    }

    /// Uniform `(0, 1)` variate number `k` of this stream (shares positions
    /// with [`NoiseStream::draw_at`]; use a dedicated lane).
    pub fn uniform_at(&self, k: u64) -> f64 {
        open_unit(self.rng_at(k).next_u64())
    }

    /// Draw number `k` of this stream, independent of the current position.
    pub fn draw_at(&self, alpha: StabilityIndex, k: u64) -> f64 {
        let mut rng = self.rng_at(k);
        let u1 = open_unit(rng.next_u64());
        let u2 = open_unit(rng.next_u64());
        standard_sas(alpha.get(), u1, u2)
    }
}

/// SplitMix64 expansion of a 64-bit seed into a ChaCha key.
fn expand_seed(seed: u64) -> [u8; 32] {
    let mut state = seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
        chunk.copy_from_slice(&z.to_le_bytes());
    }
    key
}

/// Uniform on the open interval (0, 1) from the top 53 bits.
#[inline]
fn open_unit(x: u64) -> f64 {
    ((x >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Unit-scale symmetric stable variate from two independent uniforms.
///
/// Chambers–Mallows–Stuck for `α < 2` with the Cauchy branch at `α = 1`;
/// Box–Muller at `α = 2`. For the symmetric law the CMS expression has no
/// `α → 1` cancellation, so no separate near-one form is needed.
#[inline]
fn standard_sas(alpha: f64, u1: f64, u2: f64) -> f64 {
    if alpha == 2.0 {
        // N(0, 2): characteristic function exp(-λ²).
        return 2.0 * (-u2.ln()).sqrt() * (2.0 * PI * u1).cos();
    }
    let v = PI * (u1 - 0.5);
    if alpha == 1.0 {
        return v.tan();
    }
    let w = -u2.ln();
    let cos_v = v.cos();
    let lead = (alpha * v).sin() / cos_v.powf(1.0 / alpha);
    let tail = (((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) / alpha);
    let y = lead * tail;
    // Overflow is only reachable for very small α at the extreme uniforms.
    if y.is_finite() {
        y
    } else {
        v.signum() * 1e300
    }
}

/// `n` i.i.d. SαS draws with characteristic function `exp(-scale^α |λ|^α)`.
///
/// A zero scale is accepted and yields the point mass at zero.
pub fn sample_sas(
    alpha: StabilityIndex,
    scale: f64,
    n: usize,
    stream: &mut NoiseStream,
) -> Result<Vec<f64>> {
    if !scale.is_finite() || scale < 0.0 {
        return invalid(format!("scale = {scale} must be finite and non-negative"));
    }
    let mut out = vec![0.0; n];
    stream.fill_standard(alpha, &mut out);
    if scale != 1.0 {
        for y in &mut out {
            *y *= scale;
        }
    }
    Ok(out)
}

/// Empirical `r^α P[|Y| > r]` for unit-scale SαS `Y`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailEstimate {
    pub alpha: f64,
    pub r: f64,
    pub n: usize,
    pub hits: usize,
    pub estimate: f64,
    pub stderr: f64,
    /// 3σ binomial interval on the estimate.
    pub ci: (f64, f64),
}

/// Estimates the tail constant `K₁ = lim r^α P[|Y| > r]`.
///
/// The asymptotic regime is the caller's business; `r ≥ 20` is a reasonable
/// floor for `α ≥ 1`.
pub fn tail_constant_check(
    alpha: StabilityIndex,
    r: f64,
    n: usize,
    stream: &mut NoiseStream,
) -> Result<TailEstimate> {
    if alpha.is_gaussian() {
        return Err(Error::GaussianTail);
    }
    if n == 0 {
        return Err(Error::EmptySample);
    }
    if !(r > 0.0 && r.is_finite()) {
        return invalid(format!("r = {r} must be positive"));
    }
    let mut hits = 0usize;
    let mut buf = vec![0.0; 4096.min(n)];
    let mut left = n;
    while left > 0 {
        let m = left.min(buf.len());
        stream.fill_standard(alpha, &mut buf[..m]);
        hits += buf[..m].iter().filter(|y| y.abs() > r).count();
        left -= m;
    }
    let p = hits as f64 / n as f64;
    let factor = r.powf(alpha.get());
    let stderr = factor * (p * (1.0 - p) / n as f64).sqrt();
    let estimate = factor * p;
    Ok(TailEstimate {
        alpha: alpha.get(),
        r,
        n,
        hits,
        estimate,
        stderr,
        ci: ((estimate - 3.0 * stderr).max(0.0), estimate + 3.0 * stderr),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(a: f64) -> StabilityIndex {
        StabilityIndex::new(a).unwrap()
    }

    #[test]
    fn rejects_out_of_range_alpha() {
        assert!(StabilityIndex::new(0.0).is_err());
        assert!(StabilityIndex::new(2.0001).is_err());
        assert!(StabilityIndex::new(f64::NAN).is_err());
        assert!(StabilityIndex::new(2.0).is_ok());
    }

    #[test]
    fn gaussian_variance_is_two() {
        let mut s = NoiseStream::new(7, 0);
        let y = sample_sas(idx(2.0), 1.0, 1_000_000, &mut s).unwrap();
        let m = y.iter().sum::<f64>() / y.len() as f64;
        let v = y.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (y.len() - 1) as f64;
        assert!((v - 2.0).abs() < 0.01, "variance {v}");
    }

    #[test]
    fn cauchy_tail_matches_cdf() {
        // P[|Y| > 50] = 1 - (2/π) arctan 50, times 50 → 0.63657...
        let exact = 50.0 * (1.0 - 2.0 / PI * 50f64.atan());
        let est =
            tail_constant_check(idx(1.0), 50.0, 1_000_000, &mut NoiseStream::new(3, 1)).unwrap();
        assert!(
            (est.estimate - exact).abs() < 3.0 * est.stderr,
            "{est:?} vs {exact}"
        );
        assert!((est.estimate / exact - 1.0).abs() < 0.05);
    }

    #[test]
    fn zero_scale_is_point_mass() {
        let y = sample_sas(idx(0.8), 0.0, 100, &mut NoiseStream::new(1, 1)).unwrap();
        assert!(y.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_bad_scale() {
        let mut s = NoiseStream::new(1, 1);
        assert!(sample_sas(idx(1.5), f64::INFINITY, 3, &mut s).is_err());
        assert!(sample_sas(idx(1.5), -1.0, 3, &mut s).is_err());
    }

    #[test]
    fn tail_check_errors() {
        let mut s = NoiseStream::new(1, 1);
        assert!(matches!(
            tail_constant_check(idx(2.0), 50.0, 10, &mut s),
            Err(Error::GaussianTail)
        ));
        let err = tail_constant_check(idx(1.0), 50.0, 0, &mut s).unwrap_err();
        assert_eq!(err.to_string(), "empty sample");
    }

    #[test]
    fn draw_is_function_of_seed_stream_index() {
        let a = idx(1.5);
        let mut s = NoiseStream::new(11, 5);
        let mut first = vec![0.0; 10];
        s.fill_standard(a, &mut first);
        let mut second = vec![0.0; 5];
        s.fill_standard(a, &mut second);
        let fresh = NoiseStream::new(11, 5);
        for (k, v) in first.iter().chain(second.iter()).enumerate() {
            assert_eq!(v.to_bits(), fresh.draw_at(a, k as u64).to_bits());
        }
        assert_ne!(fresh.draw_at(a, 0), NoiseStream::new(11, 6).draw_at(a, 0));
        assert_ne!(fresh.draw_at(a, 0), NoiseStream::new(12, 5).draw_at(a, 0));
    }

    #[test]
    fn median_is_near_zero() {
        for &a in &[0.8, 1.0, 1.5, 2.0] {
            let mut y = sample_sas(idx(a), 1.0, 100_000, &mut NoiseStream::new(9, 2)).unwrap();
            y.sort_by(f64::total_cmp);
            let n = y.len();
            let med = y[n / 2];
            let iqr = y[3 * n / 4] - y[n / 4];
            assert!(
                med.abs() < 4.0 * iqr / (n as f64).sqrt(),
                "alpha {a}: median {med}"
            );
        }
    }
}
