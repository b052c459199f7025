//! Grid-restricted evaluations.
//!
//! Suprema run over grid points or grid pairs, integrals use the composite
//! trapezoid rule on the grid. These are the discrete surrogates of the
//! continuous-time functionals; they converge under refinement but are not
//! equal to them.

use super::{SemiNormKind, SemiNormSpec};
use crate::error::{Error, Result};
use crate::processes::Path;

/// Evaluates `spec` on `path` restricted to `[a, b]` (grid knots).
pub fn evaluate(spec: &SemiNormSpec, path: &Path, a: f64, b: f64) -> Result<f64> {
    let i = path.grid.index_of(a)?;
    let j = path.grid.index_of(b)?;
    if j <= i {
        return Err(Error::EmptyInterval);
    }
    Ok(evaluate_slice(spec, &path.values[i..=j], path.grid.step()))
}

/// Evaluates `spec` on samples `f` spaced `dt` apart.
pub fn evaluate_slice(spec: &SemiNormSpec, f: &[f64], dt: f64) -> f64 {
    use SemiNormKind::*;
    if f.len() < 2 {
        return 0.0;
    }
    match spec.kind() {
        Sup => f.iter().fold(0.0, |m, v| m.max(v.abs())),
        Lp => lp(f, dt, spec.p()),
        Holder => holder(f, dt, spec.eta()),
        CalderonZygmund => calderon_zygmund(f, dt),
        Lipschitz => lipschitz(f, dt, spec.eta()),
        Pvar => pvar(f, spec.p()),
        Sobolev => sobolev(f, dt, spec.eta(), spec.p()),
        Besov => besov(f, dt, spec.eta(), spec.p(), spec.q()),
    }
}

fn trapezoid_pow(g: impl Iterator<Item = f64>, n: usize, dt: f64, p: f64) -> f64 {
    let mut s = 0.0;
    for (i, v) in g.enumerate() {
        let w = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
        s += w * v.abs().powf(p);
    }
    s * dt
}

fn lp(f: &[f64], dt: f64, p: f64) -> f64 {
    trapezoid_pow(f.iter().copied(), f.len(), dt, p).powf(1.0 / p)
}

fn holder(f: &[f64], dt: f64, eta: f64) -> f64 {
    let n = f.len();
    let mut best = 0.0f64;
    for gap in 1..n {
        let denom = (gap as f64 * dt).powf(eta);
        let mut m = 0.0f64;
        for i in 0..n - gap {
            m = m.max((f[i + gap] - f[i]).abs());
        }
        best = best.max(m / denom);
    }
    best
}

/// Pairs with an even index gap, so the midpoint is a knot.
fn calderon_zygmund(f: &[f64], dt: f64) -> f64 {
    let n = f.len();
    let mut best = 0.0f64;
    for half in 1..=(n - 1) / 2 {
        let gap = 2 * half;
        let mut m = 0.0f64;
        for i in 0..n - gap {
            m = m.max((2.0 * f[i + half] - f[i] - f[i + gap]).abs());
        }
        best = best.max(m / (gap as f64 * dt));
    }
    best
}

/// `n`-th difference quotients `Δ⁻ⁿ Σ_k (−1)^{n−k} C(n,k) f_{i+k}`, which
/// approximate `f⁽ⁿ⁾` at the cell-centred points `(i + n/2)Δ`.
fn difference_quotients(f: &[f64], dt: f64, n: usize) -> Vec<f64> {
    let mut g = f.to_vec();
    for _ in 0..n {
        g = g.windows(2).map(|w| (w[1] - w[0]) / dt).collect();
    }
    g
}

/// `η`-Lipschitz: Hölder of order `η − n` of the `n = ⌊η⌋`-th difference
/// quotient; for integer `η` the Calderón–Zygmund form of the `(η−1)`-th.
fn lipschitz(f: &[f64], dt: f64, eta: f64) -> f64 {
    let n = eta.floor() as usize;
    if (eta - n as f64).abs() < 1e-12 {
        let g = difference_quotients(f, dt, n - 1);
        if g.len() < 3 {
            return 0.0;
        }
        calderon_zygmund(&g, dt)
    } else {
        let g = difference_quotients(f, dt, n);
        if g.len() < 2 {
            return 0.0;
        }
        holder(&g, dt, eta - n as f64)
    }
}

/// Exact optimum over grid subsequences:
/// `V(i) = max_{j<i} (V(j) + |f_i − f_j|^p)`, result `V(N)^{1/p}`.
///
/// Extending a partition by an endpoint never lowers the sum, so the
/// optimum uses both endpoints.
fn pvar(f: &[f64], p: f64) -> f64 {
    let n = f.len();
    let mut v = vec![0.0f64; n];
    for i in 1..n {
        let mut best = f64::NEG_INFINITY;
        for j in 0..i {
            best = best.max(v[j] + (f[i] - f[j]).abs().powf(p));
        }
        v[i] = best;
    }
    v[n - 1].powf(1.0 / p)
}

/// Brute-force p-variation over all subsequences containing both endpoints.
/// Exponential cost; a test oracle for small grids (`f.len() ≤ 20`).
pub fn pvar_exhaustive(f: &[f64], p: f64) -> f64 {
    let n = f.len();
    assert!(n <= 20, "exhaustive p-variation is limited to 20 points");
    if n < 2 {
        return 0.0;
    }
    let interior = n - 2;
    let mut best = 0.0f64;
    for mask in 0u32..(1 << interior) {
        let mut last = 0;
        let mut s = 0.0;
        for k in 1..n {
            if k == n - 1 || mask & (1 << (k - 1)) != 0 {
                s += (f[k] - f[last]).abs().powf(p);
                last = k;
            }
        }
        best = best.max(s);
    }
    best.powf(1.0 / p)
}

/// Trapezoid product rule over grid pairs; the diagonal contributes 0 (the
/// integrand vanishes there when `η + 1/p < 1`).
fn sobolev(f: &[f64], dt: f64, eta: f64, p: f64) -> f64 {
    let n = f.len();
    let w = |i: usize| if i == 0 || i + 1 == n { 0.5 * dt } else { dt };
    let expo = eta * p + 1.0;
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let d = (f[j] - f[i]).abs().powf(p) / ((j - i) as f64 * dt).powf(expo);
            s += 2.0 * w(i) * w(j) * d;
        }
    }
    s.powf(1.0 / p)
}

/// `ω_p(mΔ)` for a single shift: `‖f(· − h) − f‖_{L_p(I_h)}`.
fn shift_modulus(f: &[f64], dt: f64, m: usize, p: f64) -> f64 {
    let d = f[m..].iter().zip(f).map(|(a, b)| a - b);
    if p.is_infinite() {
        d.fold(0.0, |acc, v| acc.max(v.abs()))
    } else {
        lp_of(d, f.len() - m, dt, p)
    }
}

fn lp_of(d: impl Iterator<Item = f64>, n: usize, dt: f64, p: f64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    trapezoid_pow(d, n, dt, p).powf(1.0 / p)
}

/// Besov semi-norm: `ω_p(t)` over integer shifts `h = mΔ ≤ t` at dyadic
/// `t_k = 2^k Δ ≤ |I|/2`, outer `∫ (ω/t^η)^q dt/t` by the trapezoid rule in
/// `log t`.
fn besov(f: &[f64], dt: f64, eta: f64, p: f64, q: f64) -> f64 {
    let cells = f.len() - 1;
    let mut terms = Vec::new();
    let mut omega = 0.0f64;
    let mut m_done = 0;
    let mut k = 0;
    while (1usize << k) * 2 <= cells {
        let m_max = 1usize << k;
        for m in m_done + 1..=m_max {
            omega = omega.max(shift_modulus(f, dt, m, p));
        }
        m_done = m_max;
        let t = m_max as f64 * dt;
        terms.push(omega / t.powf(eta));
        k += 1;
    }
    if terms.is_empty() {
        return 0.0;
    }
    if q.is_infinite() {
        return terms.iter().fold(0.0, |a, &v| a.max(v));
    }
    let ln2 = std::f64::consts::LN_2;
    let last = terms.len() - 1;
    let s: f64 = terms
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let w = if i == 0 || i == last { 0.5 * ln2 } else { ln2 };
            w * v.powf(q)
        })
        .sum();
    s.powf(1.0 / q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::processes::Grid;

    fn sample(level: u32, f: impl Fn(f64) -> f64) -> Path {
        Path::from_fn(Grid::unit(level), f)
    }

    #[test]
    fn sup_of_affine() {
        let p = sample(8, |t| 1.0 - 2.0 * t);
        assert_eq!(evaluate(&SemiNormSpec::sup(), &p, 0.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn pvar_examples() {
        let s = SemiNormSpec::pvar(2.0).unwrap();
        let v = evaluate_slice(&s, &[0.0, 1.0, 0.0, 1.0], 1.0 / 3.0);
        assert!((v - 3f64.sqrt()).abs() < 1e-15);
        let mono = sample(6, |t| t);
        assert!((evaluate(&s, &mono, 0.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn holder_and_lp_of_identity() {
        let id = sample(10, |t| t);
        let h = evaluate(&SemiNormSpec::holder(0.5).unwrap(), &id, 0.0, 1.0).unwrap();
        assert!((h - 1.0).abs() < 1e-15);
        let l2 = evaluate(&SemiNormSpec::lp(2.0).unwrap(), &id, 0.0, 1.0).unwrap();
        assert!((l2 - 3f64.sqrt().recip()).abs() < 1e-6);
    }

    #[test]
    fn calderon_zygmund_kills_affine() {
        let p = sample(6, |t| 3.0 * t - 1.0);
        let cz = evaluate(&SemiNormSpec::calderon_zygmund(), &p, 0.0, 1.0).unwrap();
        assert!(cz < 1e-13);
        // |2(1/4) − 0 − 1| / 1 = 1/2 for t² on [0,1].
        let sq = sample(6, |t| t * t);
        let cz = evaluate(&SemiNormSpec::calderon_zygmund(), &sq, 0.0, 1.0).unwrap();
        assert!((cz - 0.5).abs() < 1e-14);
    }

    #[test]
    fn lipschitz_of_quadratic() {
        // f = t²: f' = 2t, (3/2)-Lipschitz sup |2t − 2s|/|t−s|^{1/2} = 2.
        let p = sample(10, |t| t * t);
        let v = evaluate(&SemiNormSpec::lipschitz(1.5).unwrap(), &p, 0.0, 1.0).unwrap();
        let expect = 2.0 * (1.0 - 1.0 / 1024.0f64).sqrt();
        assert!((v - expect).abs() < 1e-9, "{v} vs {expect}");
    }

    #[test]
    fn sobolev_of_identity() {
        // f = t, p = 2, η = 0: integrand |t−s|²/|t−s| and ∫∫|t−s| = 1/3.
        let p = sample(9, |t| t);
        let v = evaluate(&SemiNormSpec::sobolev(0.0, 2.0).unwrap(), &p, 0.0, 1.0).unwrap();
        assert!((v - (1.0f64 / 3.0).sqrt()).abs() < 1e-5, "{v}");
    }

    #[test]
    fn besov_of_identity_sup_modulus() {
        // f = t, p = ∞: ω(t) = t, so ω/t^η = t^{1−η}; q = ∞ takes the largest dyadic t.
        let p = sample(6, |t| t);
        let s = SemiNormSpec::besov(0.5, f64::INFINITY, f64::INFINITY).unwrap();
        let v = evaluate(&s, &p, 0.0, 1.0).unwrap();
        assert!((v - 0.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn off_grid_and_empty_interval() {
        let p = sample(4, |t| t);
        assert!(matches!(
            evaluate(&SemiNormSpec::sup(), &p, 0.0, 0.3),
            Err(Error::OffGrid(_))
        ));
        assert!(matches!(
            evaluate(&SemiNormSpec::sup(), &p, 0.5, 0.5),
            Err(Error::EmptyInterval)
        ));
    }
}
