//! Exact-rational asymptotic series in the scaled variable `s`.

use std::fmt;
use std::str::FromStr;

use rug::{Float, Rational};
use serde::{Deserialize, Serialize};

use super::constants::{barnes_constant, dyson_constant};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SeriesName {
    /// Scaled `a_n/t` for the Laguerre weight with exponent `α`.
    C,
    /// Scaled `H_n` for the Laguerre weight.
    H,
    /// Scaled Laguerre determinant ratio, in log form.
    Delta,
    C1,
    C2,
    /// Common expansion of `σ₁` and `σ₂`.
    Sigma1,
    /// Common expansion of `Δ₁` and `Δ₂`, in log form.
    Delta1,
}

impl SeriesName {
    fn is_parametric(self) -> bool {
        matches!(self, SeriesName::C | SeriesName::H | SeriesName::Delta)
    }

    /// Delta-type series describe `ln Δ`.
    pub fn is_log_form(self) -> bool {
        matches!(self, SeriesName::Delta | SeriesName::Delta1)
    }
}

impl fmt::Display for SeriesName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SeriesName::C => "C",
            SeriesName::H => "H",
            SeriesName::Delta => "Delta",
            SeriesName::C1 => "C1",
            SeriesName::C2 => "C2",
            SeriesName::Sigma1 => "sigma1",
            SeriesName::Delta1 => "Delta1",
        };
        f.write_str(s)
    }
}

impl FromStr for SeriesName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "C" => SeriesName::C,
            "H" => SeriesName::H,
            "Delta" => SeriesName::Delta,
            "C1" => SeriesName::C1,
            "C2" => SeriesName::C2,
            "sigma" | "sigma1" | "sigma2" => SeriesName::Sigma1,
            "Delta1" | "Delta2" => SeriesName::Delta1,
            _ => return Err(Error::domain(format!("unknown series {s:?}"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    SmallS,
    LargeS,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::SmallS => "small",
            Regime::LargeS => "large",
        })
    }
}

impl FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "small" => Ok(Regime::SmallS),
            "large" => Ok(Regime::LargeS),
            _ => Err(Error::domain(format!("unknown regime {s:?}"))),
        }
    }
}

/// Constant term of a log-form series.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SeriesConstant {
    /// `c(α) = ln[G(1+α)/(2π)^{α/2}]`.
    Barnes(Rational),
    /// `ln 2/12 + 3ζ'(-1)`.
    Dyson,
}

impl SeriesConstant {
    pub fn value(&self, bits: u32) -> Result<Float> {
        match self {
            SeriesConstant::Barnes(alpha) => barnes_constant(alpha, bits),
            SeriesConstant::Dyson => Ok(dyson_constant(bits)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesTerm {
    pub exponent: Rational,
    pub coefficient: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesExpansion {
    pub name: SeriesName,
    pub regime: Regime,
    pub alpha: Option<Rational>,
    /// Ascending exponents for small `s`, descending for large `s`.
    pub terms: Vec<SeriesTerm>,
    /// Coefficient of `ln s`.
    pub log_coefficient: Option<Rational>,
    pub constant: Option<SeriesConstant>,
}

fn q(n: i64, d: i64) -> Rational {
    Rational::from((n, d))
}

/// `Π (α² - k²)^{e_k}` over the listed `(k, e_k)`.
fn shifted(alpha2: &Rational, factors: &[(i64, u32)]) -> Rational {
    let mut p = q(1, 1);
    for &(k, e) in factors {
        let f = alpha2 - Rational::from(k * k);
        for _ in 0..e {
            p *= &f;
        }
    }
    p
}

fn pow(a: &Rational, e: u32) -> Rational {
    let mut p = q(1, 1);
    for _ in 0..e {
        p *= a;
    }
    p
}

/// Shared small-s building blocks `b_k(α)`, `k = 0..=5`; each parametric
/// series is `Σ w_k b_k s^{k+shift}` for fixed rational weights `w_k`.
fn small_s_blocks(alpha: &Rational) -> Result<Vec<Rational>> {
    let a2 = Rational::from(alpha.square_ref());
    let zero = Rational::new();
    let denoms = [
        pow(alpha, 1),
        pow(alpha, 2) * shifted(&a2, &[(1, 1)]),
        pow(alpha, 3) * shifted(&a2, &[(1, 1), (2, 1)]),
        pow(alpha, 4) * shifted(&a2, &[(1, 2), (2, 1), (3, 1)]),
        pow(alpha, 5) * shifted(&a2, &[(1, 2), (2, 1), (3, 1), (4, 1)]),
        pow(alpha, 6) * shifted(&a2, &[(1, 3), (2, 2), (3, 1), (4, 1), (5, 1)]),
    ];
    if denoms.contains(&zero) {
        return Err(Error::domain(format!(
            "small-s expansion is singular at alpha = {alpha}"
        )));
    }
    let a4 = Rational::from(a2.square_ref());
    let a6 = Rational::from(&a4 * &a2);
    let nums = [
        q(1, 1),
        q(1, 1),
        q(1, 1),
        Rational::from(&a2 * 2) - 3,
        Rational::from(&a2 * 11) - 36,
        Rational::from(&a6 * 91) - Rational::from(&a4 * 1115) + Rational::from(&a2 * 4219) - 3600,
    ];
    Ok(nums.into_iter().zip(denoms).map(|(n, d)| n / d).collect())
}

/// Large-s building blocks shared by `C`, `H` and `Δ`.
struct LargeBlocks {
    /// `α(α²-1)`
    p1: Rational,
    /// `α²(α²-1)`
    p2: Rational,
    /// `α²(α²-1)(2α²-11)`
    p3: Rational,
    /// `α(α²-1)(α⁴-α²-15)`
    p4: Rational,
    /// `α²(α²-1)(8α²-33)`
    p5: Rational,
}

fn large_s_blocks(alpha: &Rational) -> LargeBlocks {
    let a2 = Rational::from(alpha.square_ref());
    let a2m1 = Rational::from(&a2 - 1);
    let a4 = Rational::from(a2.square_ref());
    let p1 = Rational::from(alpha * &a2m1);
    let p2 = Rational::from(&a2 * &a2m1);
    LargeBlocks {
        p3: (&p2 * (Rational::from(&a2 * 2) - 11)),
        p4: (&p1 * (a4 - &a2 - 15)),
        p5: (&p2 * (Rational::from(&a2 * 8) - 33)),
        p1,
        p2,
    }
}

impl SeriesExpansion {
    /// `C(s,α)`, `𝓗(s,α)` or `ln Δ(s,α)`.
    pub fn parametric(name: SeriesName, regime: Regime, alpha: &Rational) -> Result<Self> {
        if !name.is_parametric() {
            return Err(Error::domain(format!("{name} is a composite series")));
        }
        let mut log_coefficient = None;
        let mut constant = None;
        let pairs: Vec<(Rational, Rational)> = match regime {
            Regime::SmallS => {
                let b = small_s_blocks(alpha)?;
                // weights w_k and the power offset of each series; H and Δ
                // are the s-integrals of -C/2 and -C/(2s)
                let (weights, offset): ([Rational; 6], i64) = match name {
                    SeriesName::C => ([q(1, 1), q(-1, 1), q(3, 1), q(-6, 1), q(5, 1), q(-3, 1)], 0),
                    SeriesName::H => ([q(-1, 2), q(1, 4), q(-1, 2), q(3, 4), q(-1, 2), q(1, 4)], 1),
                    _ => ([q(-1, 2), q(1, 8), q(-1, 6), q(3, 16), q(-1, 10), q(1, 24)], 1),
                };
                b.into_iter()
                    .zip(weights)
                    .enumerate()
                    .map(|(k, (bk, w))| (q(k as i64 + offset, 1), bk * w))
                    .collect()
            }
            Regime::LargeS => {
                let LargeBlocks { p1, p2, p3, p4, p5 } = large_s_blocks(alpha);
                let a = alpha.clone();
                let a2 = Rational::from(alpha.square_ref());
                match name {
                    SeriesName::C => vec![
                        (q(-1, 3), q(1, 1)),
                        (q(-2, 3), a * q(-1, 3)),
                        (q(-4, 3), p1.clone() / 81),
                        (q(-5, 3), p2 / 243),
                        (q(-2, 1), p1 / 243),
                        (q(-7, 3), p3 * q(-2, 6561)),
                        (q(-8, 3), p4 * q(-5, 19683)),
                    ],
                    SeriesName::H => vec![
                        (q(2, 3), q(-3, 4)),
                        (q(1, 3), a / 2),
                        (q(0, 1), (1 - a2 * 6) / 36),
                        (q(-1, 3), p1.clone() / 54),
                        (q(-2, 3), p2 / 324),
                        (q(-1, 1), p1 / 486),
                        (q(-4, 3), p3 * q(-1, 8748)),
                        (q(-5, 3), p4 * q(-1, 13122)),
                        (q(-2, 1), p5 * q(-1, 26244)),
                    ],
                    _ => {
                        log_coefficient = Some((1 - a2 * 6) / 36);
                        constant = Some(SeriesConstant::Barnes(alpha.clone()));
                        vec![
                            (q(2, 3), q(-9, 8)),
                            (q(1, 3), a * q(3, 2)),
                            (q(-1, 3), p1.clone() * q(-1, 18)),
                            (q(-2, 3), p2 * q(-1, 216)),
                            (q(-1, 1), p1 * q(-1, 486)),
                            (q(-4, 3), p3 / 11664),
                            (q(-5, 3), p4 / 21870),
                        ]
                    }
                }
            }
        };
        Ok(SeriesExpansion {
            name,
            regime,
            alpha: Some(alpha.clone()),
            terms: collect_terms(pairs, regime),
            log_coefficient,
            constant,
        })
    }

    /// Composites assembled from the parametric series at `α = ±1/2`:
    /// `C₁ = 2C(s,-1/2)`, `C₂ = 2C(s,1/2)`, `σ₁ = 2[𝓗(s,1/2) + 𝓗(s,-1/2)]`,
    /// `ln Δ₁ = ln Δ(s,1/2) + ln Δ(s,-1/2)`.
    pub fn composite(name: SeriesName, regime: Regime) -> Result<Self> {
        let plus = q(1, 2);
        let minus = q(-1, 2);
        let p = |n, a: &Rational| SeriesExpansion::parametric(n, regime, a);
        let mut out = match name {
            SeriesName::C1 => p(SeriesName::C, &minus)?.scaled(&q(2, 1)),
            SeriesName::C2 => p(SeriesName::C, &plus)?.scaled(&q(2, 1)),
            SeriesName::Sigma1 => p(SeriesName::H, &plus)?
                .plus(&p(SeriesName::H, &minus)?)
                .scaled(&q(2, 1)),
            SeriesName::Delta1 => {
                let mut d = p(SeriesName::Delta, &plus)?.plus(&p(SeriesName::Delta, &minus)?);
                if regime == Regime::LargeS {
                    // c(1/2) + c(-1/2) = ln(G(1/2)²Γ(1/2)) = ln 2/12 + 3ζ'(-1)
                    d.constant = Some(SeriesConstant::Dyson);
                }
                d
            }
            _ => return Err(Error::domain(format!("{name} is a parametric series"))),
        };
        out.name = name;
        out.alpha = None;
        Ok(out)
    }

    /// The parametric or composite series of this name.
    pub fn named(name: SeriesName, regime: Regime, alpha: Option<&Rational>) -> Result<Self> {
        if name.is_parametric() {
            let a = alpha.ok_or_else(|| Error::domain(format!("{name} needs an alpha")))?;
            Self::parametric(name, regime, a)
        } else {
            Self::composite(name, regime)
        }
    }

    pub fn coefficient(&self, exponent: &Rational) -> Rational {
        self.terms
            .iter()
            .find(|t| t.exponent == *exponent)
            .map(|t| t.coefficient.clone())
            .unwrap_or_default()
    }

    fn scaled(mut self, k: &Rational) -> Self {
        for t in &mut self.terms {
            t.coefficient *= k;
        }
        if let Some(l) = &mut self.log_coefficient {
            *l *= k;
        }
        self
    }

    /// Termwise sum; constants must both be Barnes values and are dropped,
    /// leaving the caller to attach the combined constant.
    fn plus(&self, other: &Self) -> Self {
        let pairs = self
            .terms
            .iter()
            .chain(&other.terms)
            .map(|t| (t.exponent.clone(), t.coefficient.clone()))
            .collect();
        let log_coefficient = match (&self.log_coefficient, &other.log_coefficient) {
            (None, None) => None,
            (a, b) => Some(a.clone().unwrap_or_default() + b.clone().unwrap_or_default()),
        };
        SeriesExpansion {
            name: self.name,
            regime: self.regime,
            alpha: None,
            terms: collect_terms(pairs, self.regime),
            log_coefficient,
            constant: None,
        }
    }

    /// `d/ds` of a power series without log or constant parts.
    pub fn derivative(&self) -> Result<Vec<SeriesTerm>> {
        if self.log_coefficient.is_some() {
            return Err(Error::domain("derivative of a series with a log term"));
        }
        let pairs = self
            .terms
            .iter()
            .map(|t| (Rational::from(&t.exponent - 1), Rational::from(&t.coefficient * &t.exponent)))
            .collect();
        Ok(collect_terms(pairs, self.regime))
    }

    /// `s d/ds` of the series; the log term becomes a constant.
    pub fn s_derivative(&self) -> Vec<SeriesTerm> {
        let mut pairs: Vec<(Rational, Rational)> = self
            .terms
            .iter()
            .map(|t| (t.exponent.clone(), Rational::from(&t.coefficient * &t.exponent)))
            .collect();
        if let Some(l) = &self.log_coefficient {
            pairs.push((Rational::new(), l.clone()));
        }
        collect_terms(pairs, self.regime)
    }

    /// Exponents strictly ordered for the regime, no zero coefficients.
    pub fn is_well_formed(&self) -> bool {
        let ordered = self.terms.windows(2).all(|w| match self.regime {
            Regime::SmallS => w[0].exponent < w[1].exponent,
            Regime::LargeS => w[0].exponent > w[1].exponent,
        });
        ordered && self.terms.iter().all(|t| t.coefficient != 0)
    }
}

/// Merges equal exponents, drops zeros and orders for the regime.
fn collect_terms(mut pairs: Vec<(Rational, Rational)>, regime: Regime) -> Vec<SeriesTerm> {
    pairs.sort_by(|a, b| a.0.cmp(&b.0));
    let mut out: Vec<SeriesTerm> = Vec::new();
    for (e, c) in pairs {
        match out.last_mut() {
            Some(last) if last.exponent == e => last.coefficient += c,
            _ => out.push(SeriesTerm {
                exponent: e,
                coefficient: c,
            }),
        }
    }
    out.retain(|t| t.coefficient != 0);
    if regime == Regime::LargeS {
        out.reverse();
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Truncation {
    /// Stop before the smallest-magnitude term.
    Auto,
    /// The first `k` power terms.
    Terms(usize),
}

#[derive(Clone, Debug)]
pub struct SeriesValue {
    pub value: Float,
    /// Magnitude of the first omitted term; when nothing is omitted, that
    /// of the last term used.
    pub next_term_bound: Float,
    pub terms_used: usize,
}

/// `s^e` for rational `e`.
fn power(s: &Float, e: &Rational) -> Float {
    let bits = s.prec();
    let (num, den) = (e.numer().to_i32().unwrap_or(0), e.denom().to_u32().unwrap_or(1));
    let root = if den == 1 {
        s.clone()
    } else {
        Float::with_val(bits, s.root_ref(den))
    };
    if num >= 0 {
        Float::with_val(bits, rug::ops::Pow::pow(&root, num as u32))
    } else {
        Float::with_val(bits, rug::ops::Pow::pow(&root, num.unsigned_abs())).recip()
    }
}

/// Evaluates the series at `s`; log-form series return `ln Δ`, with the
/// constant and `ln s` parts always included.
pub fn eval_series(series: &SeriesExpansion, s: &Float, truncation: Truncation) -> Result<SeriesValue> {
    if !(*s > 0) {
        return Err(Error::domain("series evaluation needs s > 0"));
    }
    let bits = s.prec();
    let values: Vec<Float> = series
        .terms
        .iter()
        .map(|t| Float::with_val(bits, &t.coefficient) * power(s, &t.exponent))
        .collect();
    let used = match truncation {
        Truncation::Terms(k) if k > values.len() => {
            return Err(Error::domain(format!(
                "{} has only {} terms",
                series.name,
                values.len()
            )))
        }
        Truncation::Terms(k) => k,
        Truncation::Auto => values
            .iter()
            .enumerate()
            .min_by(|a, b| {
                let (x, y) = (Float::with_val(bits, a.1.abs_ref()), Float::with_val(bits, b.1.abs_ref()));
                x.partial_cmp(&y).expect("finite terms")
            })
            .map(|(i, _)| i)
            .unwrap_or(0),
    };
    let mut value = Float::new(bits);
    for v in &values[..used] {
        value += v;
    }
    if let Some(l) = &series.log_coefficient {
        value += Float::with_val(bits, l) * Float::with_val(bits, s.ln_ref());
    }
    if let Some(c) = &series.constant {
        value += c.value(bits)?;
    }
    let next_term_bound = match values.get(used).or_else(|| used.checked_sub(1).and_then(|i| values.get(i))) {
        Some(v) => Float::with_val(bits, v.abs_ref()),
        None => Float::new(bits),
    };
    Ok(SeriesValue {
        value,
        next_term_bound,
        terms_used: used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coeffs(name: SeriesName, regime: Regime) -> Vec<(Rational, Rational)> {
        SeriesExpansion::composite(name, regime)
            .unwrap()
            .terms
            .into_iter()
            .map(|t| (t.exponent, t.coefficient))
            .collect()
    }

    #[test]
    fn composite_small_c1() {
        let c = coeffs(SeriesName::C1, Regime::SmallS);
        let expect = [(-4, 1), (32, 3), (-256, 15), (8192, 315), (-311296, 8505), (7733248, 155925)];
        assert_eq!(c.len(), expect.len());
        for (k, ((e, v), (n, d))) in c.iter().zip(expect).enumerate() {
            assert_eq!(*e, q(k as i64, 1));
            assert_eq!(*v, q(n, d));
        }
    }

    #[test]
    fn c2_minus_c1_keeps_even_powers() {
        let c1 = SeriesExpansion::composite(SeriesName::C1, Regime::SmallS).unwrap();
        let c2 = SeriesExpansion::composite(SeriesName::C2, Regime::SmallS).unwrap();
        for k in 0..6 {
            let e = q(k, 1);
            let diff = c2.coefficient(&e) - c1.coefficient(&e);
            assert_eq!(diff == 0, k % 2 == 1, "k={k}");
        }
        assert_eq!(c2.coefficient(&q(0, 1)) - c1.coefficient(&q(0, 1)), 8);
    }

    #[test]
    fn delta_large_has_log_and_constant() {
        let d = SeriesExpansion::composite(SeriesName::Delta1, Regime::LargeS).unwrap();
        assert_eq!(d.log_coefficient, Some(q(-1, 36)));
        assert_eq!(d.constant, Some(SeriesConstant::Dyson));
        assert_eq!(d.coefficient(&q(2, 3)), q(-9, 4));
        assert_eq!(d.coefficient(&q(1, 3)), 0);
    }

    #[test]
    fn singular_alpha_rejected() {
        for a in [q(0, 1), q(1, 1), q(-3, 1)] {
            assert!(SeriesExpansion::parametric(SeriesName::C, Regime::SmallS, &a).is_err());
        }
        assert!(SeriesExpansion::parametric(SeriesName::C, Regime::LargeS, &q(1, 1)).is_ok());
    }

    #[test]
    fn explicit_truncation_and_bound() {
        let c = SeriesExpansion::composite(SeriesName::C2, Regime::LargeS).unwrap();
        let s = Float::with_val(128, 8);
        let v = eval_series(&c, &s, Truncation::Terms(1)).unwrap();
        assert_eq!(v.value.to_f64(), 1.0);
        // second term -1/3 · 8^{-2/3}
        assert!((v.next_term_bound.to_f64() - 1.0 / 12.0).abs() < 1e-30);
        assert!(eval_series(&c, &s, Truncation::Terms(99)).is_err());
        assert!(eval_series(&c, &Float::with_val(64, 0), Truncation::Auto).is_err());
    }

    #[test]
    fn auto_truncation_stops_before_smallest() {
        let sig = SeriesExpansion::composite(SeriesName::Sigma1, Regime::SmallS).unwrap();
        // every term grows at s = 1, so nothing is used
        let v = eval_series(&sig, &Float::with_val(128, 1), Truncation::Auto).unwrap();
        assert_eq!(v.terms_used, 0);
        assert!((v.next_term_bound.to_f64() - 16.0 / 3.0).abs() < 1e-30);
    }
}
