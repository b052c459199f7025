//! Functional semi-norms on sampled paths: evaluation, `(β, p)` classes,
//! small-deviation rates and executable axiom checks.

mod axioms;
mod class;
mod eval;
mod tables;

pub use axioms::{
    check_axioms, AxiomOutcome, AxiomReport, AxiomStatus, Corpus, CONTRACTIVITY, HOMOGENEITY,
    SCHAUDER, SELF_SIMILARITY, SUBADDITIVITY, SUPERADDITIVITY, TRANSLATION, TRIANGLE,
};
pub use class::{
    class_exponents, classify, finiteness_condition, rate_gamma, rate_gamma_exact, Finiteness,
    Membership, SemiNormClass,
};
pub use eval::{evaluate, evaluate_slice, pvar_exhaustive};
pub use tables::{rate_table, render_table_csv, verify_table, Expr, RateRow, TableFamily};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SemiNormKind {
    #[serde(alias = "sup")]
    Sup,
    #[serde(alias = "lp")]
    Lp,
    #[serde(alias = "holder")]
    Holder,
    #[serde(alias = "cz", alias = "calderon_zygmund")]
    CalderonZygmund,
    #[serde(alias = "lipschitz")]
    Lipschitz,
    #[serde(alias = "pvar")]
    Pvar,
    #[serde(alias = "sobolev")]
    Sobolev,
    #[serde(alias = "besov")]
    Besov,
}

impl SemiNormKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Sup => "SUP",
            Self::Lp => "LP",
            Self::Holder => "HOLDER",
            Self::CalderonZygmund => "CALDERON_ZYGMUND",
            Self::Lipschitz => "LIPSCHITZ",
            Self::Pvar => "PVAR",
            Self::Sobolev => "SOBOLEV",
            Self::Besov => "BESOV",
        }
    }

    pub const ALL: [SemiNormKind; 8] = [
        Self::Sup,
        Self::Lp,
        Self::Holder,
        Self::CalderonZygmund,
        Self::Lipschitz,
        Self::Pvar,
        Self::Sobolev,
        Self::Besov,
    ];
}

/// A semi-norm with its parameters. Exponents `p`, `q` may be `+∞` where
/// the definition allows it (Besov only).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct SemiNormSpec {
    kind: SemiNormKind,
    eta: Option<f64>,
    p: Option<f64>,
    q: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    kind: SemiNormKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eta: Option<f64>,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        serialize_with = "ser_ext",
        deserialize_with = "de_ext"
    )]
    p: Option<f64>,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        serialize_with = "ser_ext",
        deserialize_with = "de_ext"
    )]
    q: Option<f64>,
}

/// Serializes `+∞` as the string `"inf"`, JSON having no infinity literal.
fn ser_ext<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) if x.is_infinite() => s.serialize_str("inf"),
        Some(x) => s.serialize_f64(*x),
        None => s.serialize_none(),
    }
}

fn de_ext<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum NumOrStr {
        Num(f64),
        Str(String),
    }
    match Option::<NumOrStr>::deserialize(d)? {
        None => Ok(None),
        Some(NumOrStr::Num(x)) => Ok(Some(x)),
        Some(NumOrStr::Str(s)) => parse_extended(&s)
            .map(Some)
            .map_err(serde::de::Error::custom),
    }
}

/// Parses a real or `inf`/`infinity`/`∞`.
pub fn parse_extended(s: &str) -> Result<f64> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" | "∞" => Ok(f64::INFINITY),
        other => other
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("cannot parse '{s}' as a number"))),
    }
}

impl TryFrom<RawSpec> for SemiNormSpec {
    type Error = Error;

    fn try_from(r: RawSpec) -> Result<Self> {
        SemiNormSpec::new(r.kind, r.eta, r.p, r.q)
    }
}

impl From<SemiNormSpec> for RawSpec {
    fn from(s: SemiNormSpec) -> Self {
        RawSpec {
            kind: s.kind,
            eta: s.eta,
            p: s.p,
            q: s.q,
        }
    }
}

fn need(name: &str, kind: SemiNormKind, v: Option<f64>) -> Result<f64> {
    v.ok_or_else(|| Error::InvalidParameter(format!("{} needs parameter {name}", kind.as_str())))
}

fn refuse(name: &str, kind: SemiNormKind, v: Option<f64>) -> Result<()> {
    match v {
        Some(_) => invalid(format!("{} takes no parameter {name}", kind.as_str())),
        None => Ok(()),
    }
}

impl SemiNormSpec {
    /// Validates the parameter ranges of each kind:
    /// HOLDER `0 ≤ η < 1`; LIPSCHITZ `η > 1`; LP, PVAR `1 ≤ p < ∞`;
    /// SOBOLEV `p ≥ 1`, `0 ≤ η + 1/p < 1`; BESOV `η > 0`, `p, q ∈ [1, ∞]`.
    pub fn new(
        kind: SemiNormKind,
        eta: Option<f64>,
        p: Option<f64>,
        q: Option<f64>,
    ) -> Result<Self> {
        use SemiNormKind::*;
        for (name, v) in [("eta", eta), ("p", p), ("q", q)] {
            if matches!(v, Some(x) if x.is_nan()) {
                return invalid(format!("{name} is NaN"));
            }
        }
        let finite_p = |v: f64| {
            if !(1.0..f64::INFINITY).contains(&v) {
                invalid(format!(
                    "{}: p = {v} must be finite and >= 1",
                    kind.as_str()
                ))
            } else {
                Ok(())
            }
        };
        match kind {
            Sup | CalderonZygmund => {
                refuse("eta", kind, eta)?;
                refuse("p", kind, p)?;
                refuse("q", kind, q)?;
            }
            Lp | Pvar => {
                refuse("eta", kind, eta)?;
                refuse("q", kind, q)?;
                finite_p(need("p", kind, p)?)?;
            }
            Holder => {
                refuse("p", kind, p)?;
                refuse("q", kind, q)?;
                let e = need("eta", kind, eta)?;
                if !(0.0..1.0).contains(&e) {
                    return invalid(format!("HOLDER: eta = {e} must lie in [0, 1)"));
                }
            }
            Lipschitz => {
                refuse("p", kind, p)?;
                refuse("q", kind, q)?;
                let e = need("eta", kind, eta)?;
                if !(e > 1.0 && e.is_finite()) {
                    return invalid(format!("LIPSCHITZ: eta = {e} must exceed 1"));
                }
            }
            Sobolev => {
                refuse("q", kind, q)?;
                let e = need("eta", kind, eta)?;
                let pv = need("p", kind, p)?;
                finite_p(pv)?;
                let s = e + 1.0 / pv;
                if !(0.0..1.0).contains(&s) {
                    return invalid(format!("SOBOLEV: eta + 1/p = {s} must lie in [0, 1)"));
                }
            }
            Besov => {
                let e = need("eta", kind, eta)?;
                if !(e > 0.0 && e.is_finite()) {
                    return invalid(format!("BESOV: eta = {e} must be positive"));
                }
                for (name, v) in [("p", need("p", kind, p)?), ("q", need("q", kind, q)?)] {
                    if v < 1.0 {
                        return invalid(format!("BESOV: {name} = {v} must be >= 1"));
                    }
                }
            }
        }
        Ok(Self { kind, eta, p, q })
    }

    pub fn sup() -> Self {
        Self::new(SemiNormKind::Sup, None, None, None).unwrap()
    }

    pub fn lp(p: f64) -> Result<Self> {
        Self::new(SemiNormKind::Lp, None, Some(p), None)
    }

    pub fn holder(eta: f64) -> Result<Self> {
        Self::new(SemiNormKind::Holder, Some(eta), None, None)
    }

    pub fn calderon_zygmund() -> Self {
        Self::new(SemiNormKind::CalderonZygmund, None, None, None).unwrap()
    }

    pub fn lipschitz(eta: f64) -> Result<Self> {
        Self::new(SemiNormKind::Lipschitz, Some(eta), None, None)
    }

    pub fn pvar(p: f64) -> Result<Self> {
        Self::new(SemiNormKind::Pvar, None, Some(p), None)
    }

    pub fn sobolev(eta: f64, p: f64) -> Result<Self> {
        Self::new(SemiNormKind::Sobolev, Some(eta), Some(p), None)
    }

    pub fn besov(eta: f64, p: f64, q: f64) -> Result<Self> {
        Self::new(SemiNormKind::Besov, Some(eta), Some(p), Some(q))
    }

    pub fn kind(&self) -> SemiNormKind {
        self.kind
    }

    /// `η`, or 0 for kinds without it.
    pub fn eta(&self) -> f64 {
        self.eta.unwrap_or(0.0)
    }

    /// `p`, or `+∞` for kinds without it.
    pub fn p(&self) -> f64 {
        self.p.unwrap_or(f64::INFINITY)
    }

    pub fn q(&self) -> f64 {
        self.q.unwrap_or(f64::INFINITY)
    }

    /// Short human-readable label, e.g. `PVAR(p=3)`.
    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if let Some(e) = self.eta {
            parts.push(format!("eta={e}"));
        }
        for (n, v) in [("p", self.p), ("q", self.q)] {
            if let Some(v) = v {
                parts.push(format!(
                    "{n}={}",
                    if v.is_infinite() {
                        "inf".into()
                    } else {
                        v.to_string()
                    }
                ));
            }
        }
        if parts.is_empty() {
            self.kind.as_str().to_string()
        } else {
            format!("{}({})", self.kind.as_str(), parts.join(","))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_ranges() {
        assert!(SemiNormSpec::holder(1.0).is_err());
        assert!(SemiNormSpec::holder(0.0).is_ok());
        assert!(SemiNormSpec::lipschitz(1.0).is_err());
        assert!(SemiNormSpec::lp(0.5).is_err());
        assert!(SemiNormSpec::pvar(f64::INFINITY).is_err());
        assert!(SemiNormSpec::sobolev(0.3, 2.0).is_ok());
        assert!(SemiNormSpec::sobolev(0.6, 2.0).is_err());
        assert!(SemiNormSpec::besov(0.3, f64::INFINITY, 1.0).is_ok());
        assert!(SemiNormSpec::besov(0.0, 2.0, 2.0).is_err());
        assert!(SemiNormSpec::new(SemiNormKind::Sup, Some(0.1), None, None).is_err());
    }

    #[test]
    fn json_round_trip_with_infinity() {
        let s = SemiNormSpec::besov(0.25, f64::INFINITY, 2.0).unwrap();
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, r#"{"kind":"BESOV","eta":0.25,"p":"inf","q":2.0}"#);
        assert_eq!(serde_json::from_str::<SemiNormSpec>(&j).unwrap(), s);
        let lp: SemiNormSpec = serde_json::from_str(r#"{"kind":"lp","p":2}"#).unwrap();
        assert_eq!(lp, SemiNormSpec::lp(2.0).unwrap());
        assert!(serde_json::from_str::<SemiNormSpec>(r#"{"kind":"PVAR"}"#).is_err());
    }
}
