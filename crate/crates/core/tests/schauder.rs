use fracdev::processes::{rlp_scheme, Grid, Path, ProcessParams};
use fracdev::schauder::{
    coefficient_scaling_report, decompose, psi_jn, reconstruct, sigma_lmp, sigma_rlp, sigma_table,
    write_sigma_csv, ScaleKind, ScalingOptions,
};
use fracdev::stable_rng::{NoiseStream, StabilityIndex};
use fracdev::stats::{ks_two_sample, weighted_line};
use proptest::prelude::*;

fn idx(a: f64) -> StabilityIndex {
    StabilityIndex::new(a).unwrap()
}

fn brownian_path(level: u32, seed: u64) -> Path {
    let p = ProcessParams::rlp(2.0, 0.5).unwrap();
    rlp_scheme(&p, Grid::unit(level))
        .simulate_one(&mut [&mut NoiseStream::new(seed, 0)])
        .unwrap()
}

/// Composite Simpson on `[a, b]` after `x = a + (b−a)u^m` (left grading).
fn graded_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: i32, panels: usize) -> f64 {
    let g = |u: f64| {
        if u == 0.0 {
            return 0.0;
        }
        let x = a + (b - a) * u.powi(m);
        f(x) * (b - a) * f64::from(m) * u.powi(m - 1)
    };
    let h = 1.0 / panels as f64;
    let mut s = g(0.0) + g(1.0);
    for i in 1..panels {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i as f64 * h);
    }
    s * h / 3.0
}

/// `∫` over `[a, b]` graded toward both ends.
fn two_sided(f: impl Fn(f64) -> f64 + Copy, a: f64, b: f64, m: i32) -> f64 {
    let c = 0.5 * (a + b);
    graded_simpson(f, a, c, m, 200_000) + graded_simpson(|x| f(a + b - x), a, c, m, 200_000)
}

fn pos(x: f64, e: f64) -> f64 {
    if x > 0.0 {
        x.powf(e)
    } else {
        0.0
    }
}

#[test]
fn reconstruction_is_exact_and_refines() {
    let p = brownian_path(10, 5);
    let c = decompose(&p).unwrap();
    let full = reconstruct(&c, 9).unwrap();
    for (a, b) in full.values.iter().zip(&p.values) {
        assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
    }
    let sup_err = |js: u32| {
        let r = reconstruct(&c, js).unwrap();
        r.values
            .iter()
            .zip(&p.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    };
    // Partial sums interpolate at the knots of level j* + 1.
    let r3 = reconstruct(&c, 3).unwrap();
    for k in 0..=16 {
        assert!((r3.values[k * 64] - p.values[k * 64]).abs() < 1e-12);
    }
    let errs: Vec<f64> = (0..10).map(sup_err).collect();
    assert!(errs[9] < 1e-12);
    assert!(errs[2] > errs[6] && errs[6] > errs[8], "{errs:?}");
    assert!(reconstruct(&c, 10).is_err());
}

#[test]
fn linearity_is_exact_on_dyadic_data() {
    let f = Path::from_fn(Grid::unit(6), |t| (64.0 * t * (1.0 - t)).floor());
    let g = Path::from_fn(Grid::unit(6), |t| ((128.0 * t) as i64 % 7) as f64);
    let h = Path::new(
        f.grid,
        f.values
            .iter()
            .zip(&g.values)
            .map(|(a, b)| 2.0 * a - 3.0 * b)
            .collect(),
    )
    .unwrap();
    let (cf, cg, ch) = (
        decompose(&f).unwrap(),
        decompose(&g).unwrap(),
        decompose(&h).unwrap(),
    );
    for j in 0..6 {
        for n in 0..1usize << j {
            let want = 2.0 * cf.levels[j][n] - 3.0 * cg.levels[j][n];
            assert_eq!(ch.levels[j][n], want);
        }
    }
}

#[test]
fn tent_coefficients() {
    let p = Path::from_fn(Grid::unit(5), |t| psi_jn(2, 3, t));
    let c = decompose(&p).unwrap();
    assert_eq!(c.get(2, 3), Some(2.0));
    let nonzero = c.levels.iter().flatten().filter(|r| **r != 0.0).count();
    assert_eq!(nonzero, 1);
}

#[test]
fn rlp_sigma_closed_forms() {
    // H' = 0: kernel ±1 on [0, 1] in units of 2^{−j}.
    for a in [1.5, 2.0] {
        for (j, n) in [(3, 1), (3, 5), (6, 40)] {
            let s = sigma_rlp(j, n, idx(a), 1.0 / a, 1e-10).unwrap();
            let want = 2f64.powf(-(j as f64) / a);
            assert!((s.sigma - want).abs() < 1e-9 * want, "{a} {j} {n}");
        }
    }
    // H' = 1: kernel −v on [0, ½], v − 1 on [½, 1], zero beyond.
    for a in [1.5, 2.0] {
        let h = 1.0 + 1.0 / a;
        let s = sigma_rlp(4, 7, idx(a), h, 1e-10).unwrap();
        let want = 2f64.powf(-h * 4.0) * (2.0 * 0.5f64.powf(a + 1.0) / (a + 1.0)).powf(1.0 / a);
        assert!((s.sigma - want).abs() < 1e-9 * want);
    }
}

#[test]
fn rlp_sigma_matches_brute_force() {
    for (a, h, n) in [(1.5, 0.5, 3usize), (2.0, 0.75, 4), (1.2, 0.9, 1)] {
        let hp = h - 1.0 / a;
        let k = move |v: f64| {
            (2.0 * pos(v - 0.5, hp) - pos(v - 1.0, hp) - pos(v, hp))
                .abs()
                .powf(a)
        };
        let mut total = two_sided(k, 0.0, 0.5, 8) + two_sided(k, 0.5, 1.0, 8);
        if n > 1 {
            total += two_sided(k, 1.0, n as f64, 8);
        }
        let j = 5;
        let want = 2f64.powf(-h * j as f64) * total.powf(1.0 / a);
        let s = sigma_rlp(j, n, idx(a), h, 1e-10).unwrap();
        assert!(
            (s.sigma - want).abs() < 1e-6 * want,
            "{a} {h}: {} vs {want}",
            s.sigma
        );
    }
}

#[test]
fn rlp_sigma_level_decay() {
    let (a, h) = (2.0, 0.75);
    let js: Vec<u32> = (3..=9).collect();
    let y: Vec<f64> = js
        .iter()
        .map(|&j| {
            sigma_rlp(j, 1 << (j - 1), idx(a), h, 1e-9)
                .unwrap()
                .sigma
                .log2()
        })
        .collect();
    let x: Vec<f64> = js.iter().map(|&j| j as f64).collect();
    let fit = weighted_line(&x, &y, &vec![1.0; x.len()]).unwrap();
    assert!((fit.slope + h).abs() < 0.02, "slope {}", fit.slope);

    // n = 1: σ_j1^α 2^{αHj} is level independent, hence bounded.
    let (a, h) = (1.5, 0.9);
    let c: Vec<f64> = (0..=9)
        .map(|j| {
            sigma_rlp(j, 1, idx(a), h, 1e-10).unwrap().sigma.powf(a) * 2f64.powf(a * h * j as f64)
        })
        .collect();
    for v in &c {
        assert!((v - c[0]).abs() < 1e-8 * c[0]);
    }
}

#[test]
fn sigma_error_estimates_are_consistent() {
    for (a, h) in [(1.5, 0.5), (2.0, 0.75), (1.5, 0.9)] {
        for n in [1, 2, 7] {
            let coarse = sigma_rlp(4, n, idx(a), h, 1e-6).unwrap();
            let fine = sigma_rlp(4, n, idx(a), h, 5e-7).unwrap();
            assert!((coarse.sigma - fine.sigma).abs() <= coarse.error.max(1e-15));
        }
    }
    for n in [1, 3] {
        let coarse = sigma_lmp(3, n, idx(2.0), 0.75, 1e-6).unwrap();
        let fine = sigma_lmp(3, n, idx(2.0), 0.75, 5e-7).unwrap();
        assert!((coarse.sigma - fine.sigma).abs() <= coarse.error.max(1e-15));
    }
}

#[test]
fn lmp_sigma_matches_brute_force() {
    let (a, h) = (2.0f64, 0.75f64);
    let hp = h - 1.0 / a;
    // 30-digit adaptive quadrature of the same integral, j = 6.
    let reference = [
        (1usize, 0.004_874_788_904_960_459),
        (2, 0.000_809_818_517_730_990_9),
        (5, 0.000_200_456_475_696_832_06),
    ];
    for (n, high_precision) in reference {
        let x0 = n as f64 - 0.5;
        let g = move |x: f64| {
            (2.0 * x.powf(hp) - pos(x - 0.5, hp) - (x + 0.5).powf(hp))
                .abs()
                .powf(a)
        };
        let mut total = two_sided(g, x0, x0 + 1.0, 4);
        let mut lo = x0 + 1.0;
        while lo < 1e4 {
            total += two_sided(g, lo, lo * 10.0, 2);
            lo *= 10.0;
        }
        // Leading asymptotic term beyond the cutoff.
        let c = hp * (1.0 - hp) / 4.0;
        total += c * c * lo.powf(2.0 * hp - 3.0) / (3.0 - 2.0 * hp);
        let j = 6;
        let want = 2f64.powf(-h * j as f64) * total.powf(1.0 / a);
        let s = sigma_lmp(j, n, idx(a), h, 1e-10).unwrap();
        assert!(
            (s.sigma - want).abs() < 1e-6 * want,
            "n={n}: {} vs {want}",
            s.sigma
        );
        assert!((s.sigma - high_precision).abs() < 1e-9 * high_precision);
    }
}

#[test]
fn lmp_sigma_shape() {
    let (a, h, j) = (2.0, 0.75, 6);
    let hp = h - 1.0 / a;
    let s: Vec<f64> = (1..=40)
        .map(|n| sigma_lmp(j, n, idx(a), h, 1e-9).unwrap().sigma)
        .collect();
    for w in s[1..].windows(2) {
        assert!(w[1] < w[0]);
    }
    // Far coefficients: σ^α / (2^{−Hαj}(n−1)^{α(H'−2)+1}) stays bounded.
    let ratio = |n: usize| {
        s[n - 1].powf(a)
            / (2f64.powf(-h * a * j as f64) * ((n - 1) as f64).powf(a * (hp - 2.0) + 1.0))
    };
    let r: Vec<f64> = [9, 17, 33].iter().map(|&n| ratio(n)).collect();
    assert!(r.iter().all(|v| *v < 1.0), "{r:?}");
    // Near coefficients: σ ≤ C 2^{−Hj} with a level-free constant.
    for n in 1..=4 {
        let c6 = s[n - 1] * 2f64.powf(h * 6.0);
        let c9 = sigma_lmp(9, n, idx(a), h, 1e-9).unwrap().sigma * 2f64.powf(h * 9.0);
        assert!((c6 - c9).abs() < 1e-8 * c6);
    }
}

#[test]
fn sigma_table_and_csv() {
    let t = sigma_table(ScaleKind::RlpScale, idx(2.0), 0.5, 3, 1e-9).unwrap();
    assert_eq!(t.len(), 15);
    let again = sigma_table(ScaleKind::RlpScale, idx(2.0), 0.5, 3, 1e-9).unwrap();
    assert_eq!(t, again);
    let mut buf = Vec::new();
    write_sigma_csv(&t, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("j,n,sigma\n0,1,"));
    assert_eq!(text.lines().count(), 16);
}

#[test]
fn scaling_report_brownian() {
    let p = ProcessParams::rlp(2.0, 0.5).unwrap();
    let mut o = ScalingOptions::new(3, 300);
    o.grid_level = 10;
    o.bootstrap = 50;
    let r = coefficient_scaling_report(&p, &o).unwrap();
    assert!((r.slope + 0.5).abs() < 0.1, "{r:?}");
    assert!(r.slope_ci.0 <= r.slope && r.slope <= r.slope_ci.1);
    assert_eq!(r.levels.len(), 7);
    o.grid_level = 5;
    assert!(coefficient_scaling_report(&p, &o).is_err());
}

#[test]
fn normalized_coefficients_identically_distributed() {
    let (a, h) = (1.5, 0.9);
    let p = ProcessParams::rlp(a, h).unwrap();
    let scheme = rlp_scheme(&p, Grid::unit(12));
    let pick = |f: &[f64], j: u32| {
        let w = 4096 >> j;
        let n = 1usize << (j - 1);
        (2.0 * f[n * w + w / 2] - f[n * w] - f[(n + 1) * w])
            / sigma_rlp(j, n + 1, idx(a), h, 1e-9).unwrap().sigma
    };
    let s5 = sigma_rlp(5, 17, idx(a), h, 1e-9).unwrap().sigma;
    let s8 = sigma_rlp(8, 129, idx(a), h, 1e-9).unwrap().sigma;
    assert!(s5 > s8);
    let pairs = scheme
        .sampler(8)
        .map(0..2000, |_, f| (pick(f, 5), pick(f, 8)));
    let (y5, y8): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let ks = ks_two_sample(&y5, &y8).unwrap();
    assert!(ks.p_value > 0.01, "{ks:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn round_trip_random_paths(values in prop::collection::vec(-100.0f64..100.0, 65)) {
        let p = Path::new(Grid::unit(6), values).unwrap();
        let back = reconstruct(&decompose(&p).unwrap(), 5).unwrap();
        for (a, b) in back.values.iter().zip(&p.values) {
            prop_assert!((a - b).abs() <= 1e-12 * 100.0);
        }
    }
}
