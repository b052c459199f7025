//! Closed-form Brownian small-ball quantities.

use std::f64::consts::PI;

use crate::error::{invalid, Result};

/// `P[sup_{[0,1]} |W| ≤ ε]` for standard Brownian motion, from the series
/// `(4/π) Σ_k (−1)^k/(2k+1) exp(−(2k+1)²π²/(8ε²))`, truncated once a term
/// falls below `10⁻¹⁶` relative to the leading one. Zero for `ε ≤ 0`.
pub fn bm_sup_oracle(epsilon: f64) -> f64 {
    if epsilon.is_nan() {
        return f64::NAN;
    }
    if epsilon <= 0.0 {
        return 0.0;
    }
    // P[sup|W| > 40] < 4 P[W_1 > 40] ≈ 10⁻³⁴⁹.
    if epsilon >= 40.0 {
        return 1.0;
    }
    let c = PI * PI / (8.0 * epsilon * epsilon);
    let lead = (-c).exp();
    let mut sum = 0.0;
    let mut k = 0u64;
    loop {
        let m = (2 * k + 1) as f64;
        let term = (-c * m * m).exp() / m;
        if k > 0 && term < 1e-16 * lead {
            break;
        }
        sum += if k.is_multiple_of(2) { term } else { -term };
        k += 1;
    }
    (4.0 / PI * sum).clamp(0.0, 1.0)
}

/// Probability that a Brownian bridge from `x` to `y` over a time span with
/// variance `var` stays inside `(−ε, ε)`, by the method of images.
pub fn bridge_stay_probability(x: f64, y: f64, epsilon: f64, var: f64) -> f64 {
    let (a, b) = (x + epsilon, y + epsilon);
    let (c, d) = (epsilon - x, epsilon - y);
    if a <= 0.0 || b <= 0.0 || c <= 0.0 || d <= 0.0 {
        return 0.0;
    }
    // Every correction term is at most exp(−2·min(ab, cd)/var).
    let nearest = (a * b).min(c * d);
    if 2.0 * nearest / var > 40.0 {
        return 1.0;
    }
    let w = 2.0 * epsilon;
    let delta = y - x;
    let g = |z: f64| (-2.0 * z / var).exp();
    let mut p = 1.0 - g(a * b) - g(c * d);
    for k in 1..10_000 {
        let kw = k as f64 * w;
        let terms = g(kw * (kw - delta)) + g(kw * (kw + delta))
            - g((a + kw) * (b + kw))
            - g((c + kw) * (d + kw));
        p += terms;
        if g(kw * (kw - delta.abs())) < 1e-18 {
            break;
        }
    }
    p.clamp(0.0, 1.0)
}

/// `K = (q − 1)(C/q)^{q/(q−1)}`, the small-deviation constant matching a
/// Laplace-transform constant `C` of exponent `q > 1`.
pub fn tauberian_constant(c: f64, q: f64) -> Result<f64> {
    if !(q > 1.0 && q.is_finite()) {
        return invalid(format!("q = {q} must exceed 1"));
    }
    if !(c > 0.0 && c.is_finite()) {
        return invalid(format!("C = {c} must be positive"));
    }
    Ok((q - 1.0) * (c / q).powf(q / (q - 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_limits() {
        assert_eq!(bm_sup_oracle(0.0), 0.0);
        assert_eq!(bm_sup_oracle(50.0), 1.0);
        assert!((bm_sup_oracle(1.0) - 0.370777).abs() < 1e-6);
        assert!(bm_sup_oracle(10.0) > 0.999_999);
    }

    #[test]
    fn single_barrier_limit() {
        // Far upper barrier: 1 − exp(−2ab/t) with a, b distances to −ε.
        let (eps, var) = (1.0, 0.01);
        let p = bridge_stay_probability(-0.9, -0.8, eps, var);
        let want = 1.0 - (-2.0 * 0.1 * 0.2 / var).exp();
        assert!((p - want).abs() < 1e-15, "{p} {want}");
    }

    #[test]
    fn tauberian_values() {
        assert_eq!(tauberian_constant(1.0, 2.0).unwrap(), 0.25);
        assert_eq!(tauberian_constant(2.0, 2.0).unwrap(), 1.0);
        assert!(tauberian_constant(1.0, 1.0).is_err());
    }
}
