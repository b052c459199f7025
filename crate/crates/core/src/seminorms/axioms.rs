//! Executable checks of the semi-norm axioms on a seeded corpus of
//! piecewise-linear functions with dyadic knots.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::class::{classify, SemiNormClass};
use super::eval::{evaluate, evaluate_slice};
use super::{SemiNormKind, SemiNormSpec};
use crate::error::{invalid, Result};
use crate::processes::{Grid, Path};
use crate::stable_rng::{NoiseStream, StabilityIndex};

/// Seeded corpus: member `i` is the linear interpolation on a `2^grid_level`
/// grid of a Gaussian random walk on `2^knot_level` dyadic knots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub seed: u64,
    pub size: usize,
    pub knot_level: u32,
    pub grid_level: u32,
}

impl Corpus {
    pub fn new(seed: u64, size: usize) -> Self {
        Self {
            seed,
            size,
            knot_level: 3,
            grid_level: 5,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.size < 2 {
            return invalid("corpus needs at least 2 members");
        }
        if !(2..=self.grid_level).contains(&self.knot_level) || self.grid_level > 12 {
            return invalid(format!(
                "need 2 <= knot_level ({}) <= grid_level ({}) <= 12",
                self.knot_level, self.grid_level
            ));
        }
        Ok(())
    }

    pub fn cells(&self) -> usize {
        1 << self.grid_level
    }

    fn knot_cells(&self) -> usize {
        1 << (self.grid_level - self.knot_level)
    }

    /// Grid values of member `id`.
    pub fn member(&self, id: u64) -> Vec<f64> {
        let knots = 1usize << self.knot_level;
        let mut steps = vec![0.0; knots + 1];
        NoiseStream::for_path(self.seed, id, 0).fill_standard(gaussian(), &mut steps);
        let mut walk = Vec::with_capacity(knots + 1);
        let mut acc = 0.0;
        for s in steps {
            acc += s;
            walk.push(acc);
        }
        interpolate(&walk, self.knot_cells())
    }
}

fn gaussian() -> StabilityIndex {
    StabilityIndex::new(2.0).expect("2 is a valid index")
}

/// Linear interpolation of knot values with `per` cells between knots.
fn interpolate(knots: &[f64], per: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity((knots.len() - 1) * per + 1);
    for w in knots.windows(2) {
        for i in 0..per {
            let s = i as f64 / per as f64;
            out.push(w[0] + s * (w[1] - w[0]));
        }
    }
    out.push(*knots.last().expect("non-empty"));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxiomStatus {
    Passed,
    Failed,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomOutcome {
    pub axiom: String,
    pub status: AxiomStatus,
    pub checked: usize,
    pub failed: usize,
    /// Largest relative excess of the left side over the right side.
    pub max_violation: f64,
    /// For the Schauder condition: largest `‖Σ x_n ψ_jn‖ / (2^{βj} ‖x‖_p)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub spec: SemiNormSpec,
    pub class: SemiNormClass,
    pub corpus: Corpus,
    pub tolerance: f64,
    pub outcomes: Vec<AxiomOutcome>,
}

impl AxiomReport {
    pub fn outcome(&self, axiom: &str) -> Option<&AxiomOutcome> {
        self.outcomes.iter().find(|o| o.axiom == axiom)
    }

    /// No checked axiom failed.
    pub fn passed(&self) -> bool {
        self.outcomes
            .iter()
            .all(|o| o.status != AxiomStatus::Failed)
    }
}

pub const HOMOGENEITY: &str = "homogeneity";
pub const TRIANGLE: &str = "triangle";
pub const CONTRACTIVITY: &str = "A_contractivity";
pub const TRANSLATION: &str = "B_translation";
pub const SELF_SIMILARITY: &str = "C_self_similarity";
pub const SUPERADDITIVITY: &str = "D_superadditivity";
pub const SUBADDITIVITY: &str = "G_subadditivity";
pub const SCHAUDER: &str = "G_tilde_schauder";

const AXIOMS: [&str; 8] = [
    HOMOGENEITY,
    TRIANGLE,
    CONTRACTIVITY,
    TRANSLATION,
    SELF_SIMILARITY,
    SUPERADDITIVITY,
    SUBADDITIVITY,
    SCHAUDER,
];

/// Relative tolerance of the homogeneity check.
const HOMOGENEITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    checked: usize,
    failed: usize,
    max_violation: f64,
    max_ratio: Option<f64>,
}

impl Tally {
    /// Records `lhs ≤ rhs·(1 + tol)`.
    fn le(&mut self, lhs: f64, rhs: f64, tol: f64) {
        self.checked += 1;
        let excess = if rhs > 0.0 {
            (lhs - rhs) / rhs
        } else if lhs > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        self.max_violation = self.max_violation.max(excess);
        if lhs > rhs * (1.0 + tol) + f64::MIN_POSITIVE {
            self.failed += 1;
        }
    }

    fn eq(&mut self, lhs: f64, rhs: f64, tol: f64) {
        self.checked += 1;
        let scale = lhs.abs().max(rhs.abs());
        let dev = if scale > 0.0 {
            (lhs - rhs).abs() / scale
        } else {
            0.0
        };
        self.max_violation = self.max_violation.max(dev);
        if dev > tol {
            self.failed += 1;
        }
    }

    fn ratio(&mut self, r: f64) {
        self.max_ratio = Some(self.max_ratio.map_or(r, |m: f64| m.max(r)));
    }

    fn merge(mut self, o: Tally) -> Tally {
        self.checked += o.checked;
        self.failed += o.failed;
        self.max_violation = self.max_violation.max(o.max_violation);
        if let Some(r) = o.max_ratio {
            self.ratio(r);
        }
        self
    }
}

struct Setup {
    spec: SemiNormSpec,
    class: SemiNormClass,
    corpus: Corpus,
    tol: f64,
    dt: f64,
    exact_scaling: bool,
    /// Norm of `ψ_j1` on its support, per level `j`.
    tent_norms: Vec<f64>,
}

impl Setup {
    fn norm(&self, f: &[f64]) -> f64 {
        evaluate_slice(&self.spec, f, self.dt)
    }

    /// `(Σ a_i^p)^{1/p}`, or the maximum when `p = ∞`.
    fn combine(&self, parts: impl Iterator<Item = f64>) -> f64 {
        let p = self.class.p_index;
        if p.is_infinite() {
            parts.fold(0.0, f64::max)
        } else {
            parts.map(|a| a.powf(p)).sum::<f64>().powf(1.0 / p)
        }
    }
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn below(rng: &mut ChaCha8Rng, n: usize) -> usize {
    (rng.next_u64() % n as u64) as usize
}

/// Checks homogeneity, the triangle inequality and axioms (A)–(D), (G) and
/// the Schauder condition on every corpus member.
///
/// (D) is skipped for BESOV (upper bound only along Schauder systems) and
/// (G) wherever the class has no partition constant `C_p`; the Schauder
/// condition then reports its empirical constant without a verdict.
pub fn check_axioms(spec: &SemiNormSpec, corpus: &Corpus, tolerance: f64) -> Result<AxiomReport> {
    corpus.validate()?;
    if !(tolerance >= 0.0 && tolerance.is_finite()) {
        return invalid(format!("tolerance {tolerance} must be finite and >= 0"));
    }
    let class = classify(spec);
    let n = corpus.cells();
    let dt = 1.0 / n as f64;
    let tent_norms = (0..corpus.grid_level)
        .map(|j| {
            let width = n >> j;
            let tent: Vec<f64> = (0..=width)
                .map(|i| 1.0 - (2.0 * i as f64 / width as f64 - 1.0).abs())
                .collect();
            evaluate_slice(spec, &tent, dt)
        })
        .collect();
    let setup = Setup {
        spec: *spec,
        class,
        corpus: *corpus,
        tol: tolerance,
        dt,
        exact_scaling: matches!(
            spec.kind(),
            SemiNormKind::Sup | SemiNormKind::Pvar | SemiNormKind::CalderonZygmund
        ),
        tent_norms,
    };
    let tallies = (0..corpus.size as u64)
        .into_par_iter()
        .map(|id| check_member(&setup, id))
        .collect::<Vec<_>>()
        .into_iter()
        .fold([Tally::default(); 8], |mut acc, t| {
            for (a, b) in acc.iter_mut().zip(t) {
                *a = a.merge(b);
            }
            acc
        });
    let besov = spec.kind() == SemiNormKind::Besov;
    let outcomes = AXIOMS
        .iter()
        .zip(tallies)
        .map(|(&axiom, t)| {
            let (skip, note) = match axiom {
                SUPERADDITIVITY if besov => (
                    true,
                    Some(
                        "not asserted for a class obtained through the Schauder condition"
                            .to_string(),
                    ),
                ),
                SUBADDITIVITY if class.c_p.is_none() => {
                    (true, Some("no partition constant C_p".to_string()))
                }
                SCHAUDER if class.c_p.is_none() => (
                    true,
                    Some("constant unknown; max_ratio is the empirical constant".to_string()),
                ),
                _ => (false, None),
            };
            let status = if skip {
                AxiomStatus::Skipped
            } else if t.failed == 0 {
                AxiomStatus::Passed
            } else {
                AxiomStatus::Failed
            };
            AxiomOutcome {
                axiom: axiom.to_string(),
                status,
                checked: if skip && axiom != SCHAUDER {
                    0
                } else {
                    t.checked
                },
                failed: if skip { 0 } else { t.failed },
                max_violation: if skip { 0.0 } else { t.max_violation },
                max_ratio: t.max_ratio,
                note,
            }
        })
        .collect();
    Ok(AxiomReport {
        spec: *spec,
        class,
        corpus: *corpus,
        tolerance,
        outcomes,
    })
}

fn check_member(s: &Setup, id: u64) -> [Tally; 8] {
    let c = &s.corpus;
    let n = c.cells();
    let f = c.member(id);
    let g = c.member((id + 1) % c.size as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    rng.set_stream(id);
    let mut t = [Tally::default(); 8];
    let nf = s.norm(&f);

    // Homogeneity.
    let lambda = 6.0 * uniform(&mut rng) - 3.0;
    let scaled: Vec<f64> = f.iter().map(|v| lambda * v).collect();
    t[0].eq(s.norm(&scaled), lambda.abs() * nf, HOMOGENEITY_TOLERANCE);

    // Triangle inequality.
    let sum: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a + b).collect();
    t[1].le(s.norm(&sum), nf + s.norm(&g), s.tol);

    // (A) nested grid intervals [a2, b2] ⊂ [a, b].
    let (a, b) = sub_interval(&mut rng, 0, n);
    let (a2, b2) = sub_interval(&mut rng, a, b);
    t[2].le(s.norm(&f[a2..=b2]), s.norm(&f[a..=b]), s.tol);

    // (B) the window [a, b] against an explicitly shifted copy on [0, b − a].
    let path = Path::new(Grid::unit(c.grid_level), f.clone()).expect("valid member");
    let len = b - a;
    let shifted = Path::new(
        Grid::uniform(len, len as f64 * s.dt).expect("positive cells"),
        (0..=len).map(|i| f[a + i]).collect(),
    )
    .expect("valid shift");
    let lhs = evaluate(&s.spec, &shifted, 0.0, shifted.grid.horizon);
    let rhs = evaluate(&s.spec, &path, a as f64 * s.dt, b as f64 * s.dt);
    match (lhs, rhs) {
        (Ok(x), Ok(y)) => t[3].eq(x, y, 0.0),
        _ => t[3].eq(1.0, 0.0, 0.0),
    }

    // (C) f(2^k ·) on 2^{−k} I has the same samples with step 2^{−k} dt.
    let k = [-3i32, -2, -1, 1, 2, 3][below(&mut rng, 6)];
    let rescaled = evaluate_slice(&s.spec, &f, s.dt * 2f64.powi(-k));
    let expected = 2f64.powf(k as f64 * s.class.self_similarity) * nf;
    let tol = if s.exact_scaling { 0.0 } else { s.tol };
    t[4].eq(rescaled, expected, tol);

    // (D) split at a random interior knot.
    let kc = c.knot_cells();
    let knots = 1 << c.knot_level;
    let m = (1 + below(&mut rng, knots - 1)) * kc;
    let parts = s.combine([s.norm(&f[..=m]), s.norm(&f[m..])].into_iter());
    t[5].le(parts, nf, s.tol);

    // (G) dyadic partition into 2^l pieces; the member minus its
    // interpolant at the partition knots vanishes there.
    let l = 1 + below(&mut rng, c.knot_level as usize - 1);
    let piece = n >> l;
    let knot_vals: Vec<f64> = (0..=(1 << l)).map(|i| f[i * piece]).collect();
    let base = interpolate(&knot_vals, piece);
    let h: Vec<f64> = f.iter().zip(&base).map(|(a, b)| a - b).collect();
    if let Some(cp) = s.class.c_p {
        let parts = s.combine((0..1 << l).map(|i| s.norm(&h[i * piece..=(i + 1) * piece])));
        t[6].le(s.norm(&h), cp * parts, s.tol);
    }

    // Schauder condition at a random level j.
    let j = below(&mut rng, c.grid_level as usize);
    let tents = 1usize << j;
    let mut x = vec![0.0; tents];
    NoiseStream::for_path(c.seed, id, 1).fill_standard(gaussian(), &mut x);
    let width = n >> j;
    let mut comb = vec![0.0; n + 1];
    for (idx, xn) in x.iter().enumerate() {
        for i in 0..=width {
            comb[idx * width + i] += xn * (1.0 - (2.0 * i as f64 / width as f64 - 1.0).abs());
        }
    }
    let nc = s.norm(&comb);
    let xp = s.combine(x.iter().map(|v| v.abs()));
    if xp > 0.0 {
        t[7].ratio(nc / (2f64.powf(s.class.beta * j as f64) * xp));
        if let Some(cp) = s.class.c_p {
            t[7].le(nc, cp * s.tent_norms[j] * xp, s.tol);
        } else {
            t[7].checked += 1;
        }
    }
    t
}

/// Random grid interval `[a, b]` with `lo ≤ a < b ≤ hi`.
fn sub_interval(rng: &mut ChaCha8Rng, lo: usize, hi: usize) -> (usize, usize) {
    let a = lo + below(rng, hi - lo);
    let b = a + 1 + below(rng, hi - a);
    (a, b)
}
