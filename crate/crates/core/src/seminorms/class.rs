use std::ops::{Neg, Sub};

use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{SemiNormKind, SemiNormSpec};
use crate::error::{Error, Result};
use crate::stable_rng::StabilityIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Membership {
    /// Upper and lower `(β, p)` semi-norm.
    N,
    /// Upper semi-norm, lower only along Schauder systems.
    NTildeSchauder,
    UOnly,
}

/// `(β, p)` classification of a semi-norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemiNormClass {
    pub beta: f64,
    /// `p`, possibly `+∞` (serialized as `"inf"`).
    #[serde(with = "ext_real")]
    pub p_index: f64,
    /// Subadditivity constant; `None` where no partition-uniform constant exists.
    pub c_p: Option<f64>,
    pub membership: Membership,
    /// Self-similarity index of the upper class. Differs from `beta` only for
    /// Besov, whose rate class is `(η, ∞)` while it scales with `η − 1/p`.
    pub self_similarity: f64,
}

mod ext_real {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum NumOrStr {
            Num(f64),
            Str(String),
        }
        match NumOrStr::deserialize(d)? {
            NumOrStr::Num(x) => Ok(x),
            NumOrStr::Str(s) => {
                crate::seminorms::parse_extended(&s).map_err(serde::de::Error::custom)
            }
        }
    }
}

impl SemiNormClass {
    pub fn inv_p(&self) -> f64 {
        1.0 / self.p_index
    }
}

/// `(β, 1/p)` of `kind` in any field, with `inv_p = 1/p` of the spec (0 for ∞).
pub fn class_exponents<T>(kind: SemiNormKind, eta: T, inv_p: T) -> (T, T)
where
    T: Copy + Zero + One + Sub<Output = T> + Neg<Output = T>,
{
    use SemiNormKind::*;
    match kind {
        Sup => (T::zero(), T::zero()),
        Lp => (-inv_p, inv_p),
        Holder | Lipschitz | Besov => (eta, T::zero()),
        CalderonZygmund => (T::one(), T::zero()),
        Pvar => (T::zero(), inv_p),
        Sobolev => (eta - inv_p, inv_p),
    }
}

pub fn classify(spec: &SemiNormSpec) -> SemiNormClass {
    use SemiNormKind::*;
    let kind = spec.kind();
    let eta = spec.eta();
    let inv_p = 1.0 / spec.p();
    let (beta, inv_index) = class_exponents(kind, eta, inv_p);
    let c_p = match kind {
        Sup | Lp => Some(1.0),
        // f(±δ) = ±x with f(0) = 0 shows 2^{1−η} is attained.
        Holder => Some(2f64.powf(1.0 - eta)),
        Pvar => Some(2f64.powf(1.0 - inv_p)),
        CalderonZygmund | Lipschitz | Sobolev | Besov => None,
    };
    let membership = match kind {
        Sobolev | Besov => Membership::NTildeSchauder,
        _ => Membership::N,
    };
    let self_similarity = match kind {
        Besov => eta - inv_p,
        _ => beta,
    };
    SemiNormClass {
        beta,
        p_index: 1.0 / inv_index,
        c_p,
        membership,
        self_similarity,
    }
}

/// Small deviation rate `γ = 1/(H − β − 1/p)`, defined when `H > β + 1/p`.
pub fn rate_gamma(hurst: f64, class: &SemiNormClass) -> Result<f64> {
    let d = hurst - class.beta - class.inv_p();
    if d > 0.0 {
        Ok(1.0 / d)
    } else {
        Err(Error::NotApplicable(format!(
            "H = {hurst} <= beta + 1/p = {}: rate theorem inapplicable",
            class.beta + class.inv_p()
        )))
    }
}

/// Exact rational rate from `(β, 1/p)`, `None` when `H ≤ β + 1/p`.
pub fn rate_gamma_exact(
    hurst: Ratio<i64>,
    beta: Ratio<i64>,
    inv_p: Ratio<i64>,
) -> Option<Ratio<i64>> {
    let d = hurst - beta - inv_p;
    (d > Ratio::zero()).then(|| d.recip())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Finiteness {
    ConstantExistsFinite,
    ConstantExistsMaybeInfinite,
    OutOfTheorem,
}

/// Whether the small-deviation constant exists, and is known finite.
///
/// Existence needs `H > β + 1/p`; finiteness additionally needs a continuous
/// process (`α = 2` or `H > 1/α`) and, for `α < 2`, `H > β + 1/p + 1/α`.
/// Exact boundary values are reported as out of theorem.
pub fn finiteness_condition(
    hurst: f64,
    alpha: StabilityIndex,
    class: &SemiNormClass,
) -> Finiteness {
    let a = alpha.get();
    let base = class.beta + class.inv_p();
    let eps = 1e-12 * (1.0 + hurst.abs());
    if hurst <= base + eps {
        return Finiteness::OutOfTheorem;
    }
    if alpha.is_gaussian() {
        return Finiteness::ConstantExistsFinite;
    }
    let upper = base + 1.0 / a;
    if (hurst - upper).abs() <= eps {
        return Finiteness::OutOfTheorem;
    }
    let continuous = hurst > 1.0 / a;
    if continuous && hurst > upper {
        Finiteness::ConstantExistsFinite
    } else {
        Finiteness::ConstantExistsMaybeInfinite
    }
}
