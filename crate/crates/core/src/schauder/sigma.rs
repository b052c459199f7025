//! Scale factors `σ_jn` of the Schauder coefficients of RLP and LMP paths.
//!
//! Both reduce by self-similarity to `σ_jn = 2^{−Hj} σ̃(n)` with `σ̃` an
//! integral in units of `2^{−j}`, computed by adaptive Gauss–Kronrod with
//! the kinks and singularities of the kernel as graded break points.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{QuadResult, Quadrature};
use crate::stable_rng::StabilityIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ScaleKind {
    RlpScale,
    LmpScale,
}

/// `σ_jn` with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientScale {
    pub j: u32,
    pub n: usize,
    pub sigma: f64,
    pub error: f64,
    pub kind: ScaleKind,
}

fn check_position(j: u32, n: usize) -> Result<()> {
    if j > 40 {
        return invalid(format!("level j = {j} too large"));
    }
    if n == 0 || n > 1usize << j {
        return invalid(format!("n = {n} outside 1..=2^{j}"));
    }
    Ok(())
}

fn check_tolerance(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol < 1.0) {
        return invalid(format!("tolerance {tol} must lie in (0, 1)"));
    }
    Ok(())
}

/// `x_+^e`, zero for `x ≤ 0` whatever the sign of `e`.
fn pos_pow(x: f64, e: f64) -> f64 {
    if x > 0.0 {
        x.powf(e)
    } else {
        0.0
    }
}

/// Grading exponent that makes `|x − x₀|^ν` (`ν > −1`) smooth after `u ↦ u^m`.
fn grading(nu: f64) -> i32 {
    if nu < 0.0 {
        ((3.0 / (1.0 + nu)).ceil() as i32).clamp(3, 40)
    } else {
        3
    }
}

/// Geometric break points `from, 2from, 4from, …, to`.
fn doubling(from: f64, to: f64) -> Vec<f64> {
    let mut v = vec![from];
    let mut x = from * 2.0;
    while x < to {
        v.push(x);
        x *= 2.0;
    }
    if to > from {
        v.push(to);
    }
    v
}

fn finish(
    j: u32,
    n: usize,
    hurst: f64,
    alpha: f64,
    integral: QuadResult,
    extra_error: f64,
    kind: ScaleKind,
) -> CoefficientScale {
    let scale = 2f64.powf(-hurst * j as f64);
    let i = integral.value.max(0.0);
    let s = i.powf(1.0 / alpha);
    let rel = if i > 0.0 {
        (integral.error + extra_error) / (alpha * i)
    } else {
        0.0
    };
    CoefficientScale {
        j,
        n,
        sigma: scale * s,
        error: scale * s * rel,
        kind,
    }
}

/// `σ_jn^α = ∫₀^∞ |2(t¹−s)_+^{H'} − (t⁰−s)_+^{H'} − (t²−s)_+^{H'}|^α ds`.
///
/// With `v = 2^j(t² − s)` this is `2^{−αHj} ∫₀ⁿ |K(v)|^α dv` where
/// `K(v) = 2(v−½)_+^{H'} − (v−1)_+^{H'} − v^{H'}`, singular or kinked at
/// `v ∈ {0, ½, 1}`.
pub fn sigma_rlp(
    j: u32,
    n: usize,
    alpha: StabilityIndex,
    hurst: f64,
    tol: f64,
) -> Result<CoefficientScale> {
    check_position(j, n)?;
    check_tolerance(tol)?;
    let a = alpha.get();
    if !(hurst > 0.0 && hurst.is_finite()) {
        return invalid(format!("H = {hurst} must be positive"));
    }
    let hp = hurst - 1.0 / a;
    let k = |v: f64| {
        let r = 2.0 * pos_pow(v - 0.5, hp) - pos_pow(v - 1.0, hp) - pos_pow(v, hp);
        r.abs().powf(a)
    };
    let m = grading(a * hp);
    let mut quad = Quadrature {
        rel_tol: tol,
        abs_tol: 1e-300,
        max_intervals: 4000,
    };
    let mut r = quad.integrate_graded(k, &[0.0, 0.5, 1.0], m)?;
    if n > 1 {
        // The far part may vanish identically (H' ∈ {0, 1}); measure it
        // against the near part.
        quad.abs_tol = tol * r.value;
        let far = quad.integrate_graded(k, &doubling(1.0, n as f64), m)?;
        r = add(r, far);
    }
    Ok(finish(j, n, hurst, a, r, 0.0, ScaleKind::RlpScale))
}

/// `g(x) = 2x^{H'} − (x−½)^{H'} − (x+½)^{H'}` for `x ≥ ½`, evaluated
/// without cancellation for large `x`.
fn lmp_second_difference(x: f64, hp: f64) -> f64 {
    if x < 2.0 {
        2.0 * x.powf(hp) - pos_pow(x - 0.5, hp) - (x + 0.5).powf(hp)
    } else {
        let h = 0.5 / x;
        -x.powf(hp) * ((hp * (-h).ln_1p()).exp_m1() + (hp * h.ln_1p()).exp_m1())
    }
}

fn binom(e: f64, k: u32) -> f64 {
    (0..k).fold(1.0, |c, i| c * (e - i as f64) / (i as f64 + 1.0))
}

/// `σ_jn^α = 2^{−Hαj} ∫₀^∞ |2(u+n−½)^{H'} − (u+n−1)^{H'} − (u+n)^{H'}|^α du`.
///
/// Integrated numerically up to a cutoff `X` and in closed form beyond it
/// from the two-term expansion `g(x) ≈ a x^{H'−2} + b x^{H'−4}`. `X` is
/// chosen so that the neglected `O(x^{−4})` relative term is below the
/// tolerance (and in any case below 1%).
pub fn sigma_lmp(
    j: u32,
    n: usize,
    alpha: StabilityIndex,
    hurst: f64,
    tol: f64,
) -> Result<CoefficientScale> {
    check_position(j, n)?;
    check_tolerance(tol)?;
    let a = alpha.get();
    let hp = hurst - 1.0 / a;
    if !(a > 1.0 && hurst < 1.0 && hp > 0.0) {
        return invalid(format!(
            "sigma_lmp needs alpha in (1, 2] and H in (1/alpha, 1), got alpha = {a}, H = {hurst}"
        ));
    }
    let x0 = n as f64 - 0.5;
    let cutoff = (2.0 * n as f64).max(8.0 * tol.powf(-0.25)).max(16.0);
    let mut points = vec![x0, x0 + 1.0];
    points.extend(doubling(x0 + 1.0, cutoff).into_iter().skip(1));
    let mut quad = Quadrature {
        rel_tol: tol,
        abs_tol: 1e-300,
        max_intervals: 4000,
    };
    let f = |x: f64| lmp_second_difference(x, hp).abs().powf(a);
    let mut r = quad.integrate_graded(f, &points[..2], 3)?;
    quad.abs_tol = tol * r.value;
    r = add(r, quad.integrate_graded(f, &points[1..], 3)?);
    let ca = -binom(hp, 2) / 2.0;
    let cb = -binom(hp, 4) / 8.0;
    let e = a * (hp - 2.0);
    let lead = ca.abs().powf(a);
    let tail = lead
        * (cutoff.powf(e + 1.0) / (-e - 1.0) + a * (cb / ca) * cutoff.powf(e - 1.0) / (1.0 - e));
    // Size of the first neglected term.
    let tail_err = lead * (cb / ca).powi(2) * a * a * cutoff.powf(e - 3.0) / (3.0 - e);
    r.value += tail;
    if !(r.value.is_finite() && r.value > 0.0) {
        return Err(Error::Quadrature {
            estimate: r.value,
            error: r.error,
            intervals: r.intervals,
        });
    }
    Ok(finish(j, n, hurst, a, r, tail_err, ScaleKind::LmpScale))
}

fn add(a: QuadResult, b: QuadResult) -> QuadResult {
    QuadResult {
        value: a.value + b.value,
        error: a.error + b.error,
        intervals: a.intervals + b.intervals,
    }
}

type CacheKey = (ScaleKind, u64, u64, u32, usize, u64);

fn cache() -> &'static Mutex<HashMap<CacheKey, CoefficientScale>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, CoefficientScale>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `σ_jn` for all `1 ≤ n ≤ 2^j`, `j ≤ max_level`, computed in parallel and
/// memoized on `(kind, α, H, j, n, tol)`.
pub fn sigma_table(
    kind: ScaleKind,
    alpha: StabilityIndex,
    hurst: f64,
    max_level: u32,
    tol: f64,
) -> Result<Vec<CoefficientScale>> {
    if max_level > 16 {
        return invalid(format!("max_level {max_level} too large for a full table"));
    }
    let cells: Vec<(u32, usize)> = (0..=max_level)
        .flat_map(|j| (1..=1usize << j).map(move |n| (j, n)))
        .collect();
    cells
        .into_par_iter()
        .map(|(j, n)| {
            let key = (
                kind,
                alpha.get().to_bits(),
                hurst.to_bits(),
                j,
                n,
                tol.to_bits(),
            );
            if let Some(s) = cache().lock().expect("cache lock").get(&key) {
                return Ok(*s);
            }
            let s = match kind {
                ScaleKind::RlpScale => sigma_rlp(j, n, alpha, hurst, tol)?,
                ScaleKind::LmpScale => sigma_lmp(j, n, alpha, hurst, tol)?,
            };
            cache().lock().expect("cache lock").insert(key, s);
            Ok(s)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(a: f64) -> StabilityIndex {
        StabilityIndex::new(a).unwrap()
    }

    #[test]
    fn brownian_scale_is_exact() {
        let s = sigma_rlp(3, 4, idx(2.0), 0.5, 1e-10).unwrap();
        assert!((s.sigma - 2f64.powf(-1.5)).abs() < 1e-10, "{}", s.sigma);
    }

    #[test]
    fn lmp_expansion_matches_direct_evaluation() {
        let hp = 0.25;
        for x in [3.0, 20.0, 100.0] {
            let direct = 2.0 * f64::powf(x, hp) - f64::powf(x - 0.5, hp) - f64::powf(x + 0.5, hp);
            let g = lmp_second_difference(x, hp);
            assert!(
                (g - direct).abs() < 1e-9 * direct.abs(),
                "{x}: {g} {direct}"
            );
            let two_term =
                -binom(hp, 2) / 2.0 * x.powf(hp - 2.0) - binom(hp, 4) / 8.0 * x.powf(hp - 4.0);
            assert!((two_term - g).abs() < 0.01 * g.abs());
        }
    }

    #[test]
    fn lmp_rejects_degenerate() {
        assert!(sigma_lmp(2, 1, idx(2.0), 0.5, 1e-8).is_err());
        assert!(sigma_rlp(2, 5, idx(2.0), 0.5, 1e-8).is_err());
    }
}
