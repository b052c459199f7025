//! Small deviation rate tables by process family, with a tiny expression
//! language so the tabulated formulas can be checked against
//! [`rate_gamma_exact`](super::rate_gamma_exact) in rational arithmetic.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::class::{class_exponents, rate_gamma_exact};
use super::SemiNormKind;
use crate::error::{invalid, Error, Result};

type Q = Ratio<i64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableFamily {
    /// Brownian motion (`α = 2`, `H = 1/2`).
    Brownian,
    /// Gaussian fractional processes (`α = 2`).
    Gaussian,
    /// Non-Gaussian stable Lévy processes (`α < 2`, `H = 1/α`).
    Levy,
    /// Non-Gaussian fractional stable processes (`α < 2`).
    Stable,
}

impl TableFamily {
    pub const ALL: [TableFamily; 4] = [Self::Brownian, Self::Gaussian, Self::Levy, Self::Stable];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Brownian => "brownian",
            Self::Gaussian => "gaussian",
            Self::Levy => "levy",
            Self::Stable => "stable",
        }
    }
}

impl std::str::FromStr for TableFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown family '{s}' (brownian, gaussian, levy, stable)"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub family: TableFamily,
    pub seminorm: &'static str,
    pub kind: SemiNormKind,
    pub gamma: &'static str,
    pub condition: &'static str,
}

const fn row(
    family: TableFamily,
    seminorm: &'static str,
    kind: SemiNormKind,
    gamma: &'static str,
    condition: &'static str,
) -> RateRow {
    RateRow {
        family,
        seminorm,
        kind,
        gamma,
        condition,
    }
}

/// Rate rows of `family`.
pub fn rate_table(family: TableFamily) -> Vec<RateRow> {
    use SemiNormKind::*;
    use TableFamily::*;
    match family {
        Brownian => vec![
            row(Brownian, "Supremum", Sup, "2", ""),
            row(Brownian, "L_p", Lp, "2", ""),
            row(Brownian, "η-Hölder", Holder, "2/(1-2η)", "η < 1/2"),
            row(Brownian, "p-variation", Pvar, "2p/(p-2)", "p > 2"),
            row(Brownian, "(η,p)-Sobolev", Sobolev, "2/(1-2η)", "η < 1/2"),
            row(Brownian, "(η,∞,q)-Besov", Besov, "2/(1-2η)", "η < 1/2"),
        ],
        Gaussian => vec![
            row(Gaussian, "Supremum", Sup, "1/H", ""),
            row(Gaussian, "L_p", Lp, "1/H", ""),
            row(Gaussian, "η-Hölder", Holder, "1/(H-η)", "H > η"),
            row(Gaussian, "p-variation", Pvar, "p/(Hp-1)", "H > 1/p"),
            row(Gaussian, "(η,∞,q)-Besov", Besov, "1/(H-η)", "H > η"),
            row(
                Gaussian,
                "(η,p)-Sobolev",
                Sobolev,
                "1/(H-η)",
                "H > η; H < 2",
            ),
        ],
        Levy => vec![
            row(Levy, "Supremum", Sup, "α", ""),
            row(Levy, "L_p", Lp, "α", ""),
            row(Levy, "p-variation", Pvar, "αp/(p-α)", "p > α"),
        ],
        Stable => vec![
            row(Stable, "Supremum", Sup, "1/H", "H > 1/α"),
            row(Stable, "L_p", Lp, "1/H", "H > 1/α or H > 1/α-1/p"),
            row(Stable, "η-Hölder", Holder, "1/(H-η)", "H > η+1/α"),
            row(Stable, "p-variation", Pvar, "p/(Hp-1)", "H > 1/p+1/α"),
            row(Stable, "(η,∞,q)-Besov", Besov, "1/(H-η)", "H > η+1/α"),
            row(Stable, "(η,p)-Sobolev", Sobolev, "1/(H-η)", "H > η+1/α"),
        ],
    }
}

/// CSV with header `family,seminorm,gamma,condition`.
pub fn render_table_csv(families: &[TableFamily]) -> String {
    let mut out = String::from("family,seminorm,gamma,condition\n");
    for &f in families {
        for r in rate_table(f) {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                f.as_str(),
                r.seminorm,
                r.gamma,
                r.condition
            );
        }
    }
    out
}

impl RateRow {
    /// Hurst index implied by the family for variables `vars`.
    pub fn hurst(&self, vars: &BTreeMap<char, Q>) -> Option<Q> {
        match self.family {
            TableFamily::Brownian => Some(Q::new(1, 2)),
            TableFamily::Levy => vars.get(&'α').map(|a| a.recip()),
            TableFamily::Gaussian | TableFamily::Stable => vars.get(&'H').copied(),
        }
    }

    /// `1/(H − β − 1/p)` from the semi-norm class, evaluated exactly.
    pub fn expected(&self, vars: &BTreeMap<char, Q>) -> Option<Q> {
        let eta = vars.get(&'η').copied().unwrap_or_else(Q::zero);
        let inv_p = vars.get(&'p').map(|p| p.recip()).unwrap_or_else(Q::zero);
        // Besov rows are the (η, ∞, q) case.
        let inv_p = if self.kind == SemiNormKind::Besov {
            Q::zero()
        } else {
            inv_p
        };
        let (beta, inv_index) = class_exponents(self.kind, eta, inv_p);
        rate_gamma_exact(self.hurst(vars)?, beta, inv_index)
    }
}

/// Arithmetic expression over `+ − * /`, parentheses, integers and
/// single-letter variables; juxtaposition multiplies (`2p` = `2*p`).
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(i64),
    Var(char),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let chars: Vec<char> = src.chars().filter(|c| !c.is_whitespace()).collect();
        let mut p = Parser { s: &chars, i: 0 };
        let e = p.sum()?;
        if p.i != chars.len() {
            return invalid(format!("trailing input in '{src}' at {}", p.i));
        }
        Ok(e)
    }

    /// Exact value; `None` on division by zero or an unbound variable.
    pub fn eval(&self, vars: &BTreeMap<char, Q>) -> Option<Q> {
        Some(match self {
            Expr::Num(n) => Q::from_integer(*n),
            Expr::Var(c) => *vars.get(c)?,
            Expr::Neg(a) => -a.eval(vars)?,
            Expr::Add(a, b) => a.eval(vars)? + b.eval(vars)?,
            Expr::Sub(a, b) => a.eval(vars)? - b.eval(vars)?,
            Expr::Mul(a, b) => a.eval(vars)? * b.eval(vars)?,
            Expr::Div(a, b) => {
                let d = b.eval(vars)?;
                if d.is_zero() {
                    return None;
                }
                a.eval(vars)? / d
            }
        })
    }
}

struct Parser<'a> {
    s: &'a [char],
    i: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<char> {
        self.s.get(self.i).copied()
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut e = self.product()?;
        while let Some(c) = self.peek() {
            match c {
                '+' => {
                    self.i += 1;
                    e = Expr::Add(Box::new(e), Box::new(self.product()?));
                }
                '-' | '−' => {
                    self.i += 1;
                    e = Expr::Sub(Box::new(e), Box::new(self.product()?));
                }
                _ => break,
            }
        }
        Ok(e)
    }

    fn product(&mut self) -> Result<Expr> {
        let mut e = self.unary()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.i += 1;
                    e = Expr::Mul(Box::new(e), Box::new(self.unary()?));
                }
                Some('/') => {
                    self.i += 1;
                    e = Expr::Div(Box::new(e), Box::new(self.unary()?));
                }
                Some(c) if c == '(' || c.is_ascii_digit() || c.is_alphabetic() => {
                    e = Expr::Mul(Box::new(e), Box::new(self.unary()?));
                }
                _ => break,
            }
        }
        Ok(e)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some('-') | Some('−') => {
                self.i += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some('(') => {
                self.i += 1;
                let e = self.sum()?;
                if self.peek() != Some(')') {
                    return invalid("unbalanced parenthesis");
                }
                self.i += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.i;
                while matches!(self.peek(), Some(d) if d.is_ascii_digit()) {
                    self.i += 1;
                }
                let digits: String = self.s[start..self.i].iter().collect();
                digits
                    .parse()
                    .map(Expr::Num)
                    .map_err(|_| Error::InvalidParameter(format!("bad integer '{digits}'")))
            }
            Some(c) if c.is_alphabetic() => {
                self.i += 1;
                Ok(Expr::Var(c))
            }
            other => invalid(format!("unexpected {other:?} in expression")),
        }
    }
}

/// Checks every row of `family` against the class rate at rational sample
/// points where the rate is defined. Returns the number of points checked.
pub fn verify_table(family: TableFamily) -> Result<usize> {
    let mut checked = 0;
    let hs = [
        Q::new(3, 10),
        Q::new(1, 2),
        Q::new(3, 4),
        Q::new(9, 10),
        Q::new(3, 2),
    ];
    let etas = [Q::new(1, 10), Q::new(1, 4), Q::new(2, 5)];
    let ps = [Q::new(3, 1), Q::new(4, 1), Q::new(7, 2), Q::new(10, 1)];
    let alphas = [Q::new(1, 2), Q::one(), Q::new(3, 2), Q::new(7, 4)];
    for r in rate_table(family) {
        let expr = Expr::parse(r.gamma)?;
        for &h in &hs {
            for &eta in &etas {
                for &p in &ps {
                    for &a in &alphas {
                        let vars: BTreeMap<char, Q> = [('H', h), ('η', eta), ('p', p), ('α', a)]
                            .into_iter()
                            .collect();
                        let Some(want) = r.expected(&vars) else {
                            continue;
                        };
                        match expr.eval(&vars) {
                            Some(got) if got == want => checked += 1,
                            got => {
                                return Err(Error::InvalidParameter(format!(
                                    "{} {}: '{}' gives {got:?}, class rate {want}",
                                    family.as_str(),
                                    r.seminorm,
                                    r.gamma
                                )))
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(checked)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parser_handles_implicit_products() {
        let vars: BTreeMap<char, Q> = [('p', Q::from_integer(4)), ('H', Q::new(1, 2))]
            .into_iter()
            .collect();
        assert_eq!(
            Expr::parse("2p/(p-2)").unwrap().eval(&vars),
            Some(Q::from_integer(4))
        );
        assert_eq!(
            Expr::parse("p/(Hp-1)").unwrap().eval(&vars),
            Some(Q::from_integer(4))
        );
        assert_eq!(Expr::parse("-(1)").unwrap().eval(&vars), Some(-Q::one()));
        assert!(Expr::parse("(1").is_err());
        assert_eq!(Expr::parse("1/(p-4)").unwrap().eval(&vars), None);
    }

    #[test]
    fn all_tables_match_class_rates() {
        for f in TableFamily::ALL {
            assert!(verify_table(f).unwrap() > 0, "{f:?}");
        }
    }

    #[test]
    fn csv_rows() {
        let csv = render_table_csv(&[TableFamily::Brownian]);
        assert!(csv
            .lines()
            .any(|l| l == "brownian,p-variation,2p/(p-2),p > 2"));
    }
}
