//! Second-order difference equations in `n` for `r_n`, `R_n` and `σ_n`, as
//! residual checks on factorization data and as forward recursions.
//!
//! The `r` and `R` equations are linear in the highest index, so each
//! forward step is a division. The `σ` equation is quadratic in `σ_{n+1}`;
//! its step picks the root nearest the value predicted by the linear
//! relation `R_n = -4(-1)^n t r_n / (R_{n-1}(n + r_n))`, with `r_n` carried
//! alongside through `r_n = R_{n-1} - r_{n-1}`.

use std::fmt;

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ladder::{parity_sign, parity_term, AuxQuantities};
use crate::moments::{build_moment_table, WeightSpec};
use crate::precision::{log2_abs, PrecisionConfig};
use crate::residual::{balance, ResidualReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantity {
    #[serde(rename = "r")]
    SmallR,
    #[serde(rename = "R")]
    BigR,
    #[serde(rename = "sigma")]
    Sigma,
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quantity::SmallR => "r",
            Quantity::BigR => "R",
            Quantity::Sigma => "sigma",
        })
    }
}

impl std::str::FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "r" => Ok(Quantity::SmallR),
            "R" => Ok(Quantity::BigR),
            "sigma" => Ok(Quantity::Sigma),
            _ => Err(Error::domain(format!("unknown quantity {s:?} (r, R, sigma)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Source {
    FromHankel,
    FromRecursion,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::FromHankel => "hankel",
            Source::FromRecursion => "recursion",
        })
    }
}

#[derive(Clone, Debug)]
pub struct RecursionTrace {
    pub t: Float,
    pub quantity: Quantity,
    pub values: Vec<Float>,
    pub source: Source,
}

/// `r_0, r_1` or `R_0, R_1` or `σ_0, σ_1, σ_2` from moment ratios.
struct InitialData {
    r1: Float,
    big_r0: Float,
    big_r1: Float,
}

fn initial_data(t: &Float, prec: &PrecisionConfig) -> Result<InitialData> {
    if *t <= 0 {
        return Err(Error::domain("difference equations need t > 0"));
    }
    let bits = prec.work_bits;
    let spec = WeightSpec::gaussian(Float::with_val(bits, t))?;
    let tab = build_moment_table(&spec, -2, 2, prec)?;
    let two_t = Float::with_val(bits, t * 2u32);
    // 2t ∫y⁻²w / ∫w
    let big_r0 = Float::with_val(bits, &two_t * tab.mu(-2)) / tab.mu(0);
    // 2t ∫w / ∫y²w
    let big_r1 = Float::with_val(bits, &two_t * tab.mu(0)) / tab.mu(2);
    Ok(InitialData {
        r1: big_r0.clone(),
        big_r0,
        big_r1,
    })
}

fn e_term(n: usize, t: &Float) -> Float {
    Float::with_val(t.prec(), t * (4 * parity_sign(n)))
}

/// `-4(-1)^n t r_n = (n + r_n)(r_{n+1} + r_n)(r_n + r_{n-1})` for
/// `1 ≤ n ≤ n_max - 1`.
pub fn check_r_difference(aux: &AuxQuantities, prec: &PrecisionConfig) -> Result<ResidualReport> {
    need_n_max(aux, 2)?;
    let bits = prec.work_bits;
    let t = &aux.t;
    let r = &aux.r;
    let mut rep = ResidualReport::new();
    for n in 1..aux.n_max {
        let lhs = -Float::with_val(bits, &e_term(n, t) * &r[n]);
        let rhs = Float::with_val(bits, &r[n] + n as u64)
            * Float::with_val(bits, &r[n + 1] + &r[n])
            * Float::with_val(bits, &r[n] + &r[n - 1]);
        rep.push("r difference", n, t, balance(&[lhs, -rhs]));
    }
    let init = initial_data(t, prec)?;
    rep.push("r_0 initial", 0, t, Float::with_val(bits, r[0].abs_ref()));
    rep.push("r_1 initial", 1, t, balance(&[r[1].clone(), -init.r1]));
    Ok(rep)
}

/// `4(-1)^n t[(n+1)R_{n+1} - nR_{n-1}] + (2n+1)R_{n+1}R_nR_{n-1}
///  = [4(-1)^n t - R_{n+1}R_n][4(-1)^n t + R_nR_{n-1}]`.
pub fn check_big_r_difference(
    aux: &AuxQuantities,
    prec: &PrecisionConfig,
) -> Result<ResidualReport> {
    need_n_max(aux, 2)?;
    let bits = prec.work_bits;
    let t = &aux.t;
    let big_r = &aux.big_r;
    let mut rep = ResidualReport::new();
    for n in 1..aux.n_max {
        let e = e_term(n, t);
        let (x, a, b) = (&big_r[n + 1], &big_r[n], &big_r[n - 1]);
        let xa = Float::with_val(bits, x * a);
        let ab = Float::with_val(bits, a * b);
        let t1 = Float::with_val(bits, &e * x) * (n as u64 + 1);
        let t2 = -Float::with_val(bits, &e * b) * n as u64;
        let t3 = Float::with_val(bits, &xa * b) * (2 * n as u64 + 1);
        let rhs = Float::with_val(bits, &e - &xa) * Float::with_val(bits, &e + &ab);
        rep.push("R difference", n, t, balance(&[t1, t2, t3, -rhs]));
    }
    let init = initial_data(t, prec)?;
    rep.push("R_0 initial", 0, t, balance(&[big_r[0].clone(), -init.big_r0]));
    rep.push("R_1 initial", 1, t, balance(&[big_r[1].clone(), -init.big_r1]));
    Ok(rep)
}

/// Terms of the `σ` equation at `n`, arranged to sum to zero.
fn sigma_terms(n: usize, t: &Float, prev: &Float, cur: &Float, next: &Float) -> Vec<Float> {
    let bits = cur.prec();
    let e = e_term(n, t);
    let a = Float::with_val(bits, prev - cur);
    let b = Float::with_val(bits, cur - next);
    let ab = Float::with_val(bits, &a * &b);
    let q = Float::with_val(bits, &e + &ab);
    let q2 = Float::with_val(bits, q.square_ref());
    let t1 = Float::with_val(bits, &e * n as u64) * Float::with_val(bits, next - prev) * &q;
    let t2 = Float::with_val(bits, ab.square_ref()) * (n as u64 * n as u64);
    let t3 = -Float::with_val(bits, cur * &q2);
    let t4 = Float::with_val(bits, parity_term(n, t) * 2u32) * q2;
    vec![t1, t2, t3, t4]
}

pub fn check_sigma_difference(
    aux: &AuxQuantities,
    prec: &PrecisionConfig,
) -> Result<ResidualReport> {
    need_n_max(aux, 3)?;
    let bits = prec.work_bits;
    let t = &aux.t;
    let s = &aux.sigma;
    let mut rep = ResidualReport::new();
    for n in 1..aux.n_max {
        rep.push(
            "sigma difference",
            n,
            t,
            balance(&sigma_terms(n, t, &s[n - 1], &s[n], &s[n + 1])),
        );
    }
    let init = initial_data(t, prec)?;
    let s1 = Float::with_val(bits, -&init.big_r0);
    let s2 = Float::with_val(bits, &s1 - &init.big_r1);
    rep.push("sigma_1 initial", 1, t, balance(&[s[1].clone(), -s1]));
    rep.push("sigma_2 initial", 2, t, balance(&[s[2].clone(), -s2]));
    Ok(rep)
}

fn need_n_max(aux: &AuxQuantities, min: usize) -> Result<()> {
    if aux.n_max < min {
        return Err(Error::domain(format!(
            "difference checks need n_max ≥ {min}, got {}",
            aux.n_max
        )));
    }
    Ok(())
}

/// The factorization values of `quantity` as a trace.
pub fn hankel_trace(aux: &AuxQuantities, quantity: Quantity) -> RecursionTrace {
    let values = match quantity {
        Quantity::SmallR => aux.r.clone(),
        Quantity::BigR => aux.big_r.clone(),
        Quantity::Sigma => aux.sigma.clone(),
    };
    RecursionTrace {
        t: aux.t.clone(),
        quantity,
        values,
        source: Source::FromHankel,
    }
}

/// Iterates the difference equation for `quantity` from its moment-ratio
/// initial data up to index `n_target`.
pub fn run_recursion(
    quantity: Quantity,
    t: &Float,
    n_target: usize,
    prec: &PrecisionConfig,
) -> Result<RecursionTrace> {
    let bits = prec.work_bits;
    let t = Float::with_val(bits, t);
    let init = initial_data(&t, prec)?;
    let values = match quantity {
        Quantity::SmallR => {
            let mut v = vec![Float::new(bits), init.r1];
            for n in 1..n_target {
                let den = Float::with_val(bits, &v[n] + n as u64)
                    * Float::with_val(bits, &v[n] + &v[n - 1]);
                if den.is_zero() {
                    return Err(Error::Degenerate {
                        n,
                        what: "(n + r_n)(r_n + r_{n-1})",
                    });
                }
                let next = -Float::with_val(bits, &e_term(n, &t) * &v[n]) / den - &v[n];
                v.push(next);
            }
            v
        }
        Quantity::BigR => {
            let mut v = vec![init.big_r0, init.big_r1];
            for n in 1..n_target {
                v.push(big_r_step(n, &t, &v[n], &v[n - 1])?);
            }
            v
        }
        Quantity::Sigma => {
            let s1 = Float::with_val(bits, -&init.big_r0);
            let mut v = vec![Float::new(bits), s1];
            // r_1 is carried to select the root at each step
            let mut r_n = init.r1;
            for n in 1..n_target {
                let a = Float::with_val(bits, &v[n - 1] - &v[n]);
                if n > 1 {
                    r_n = Float::with_val(bits, &a - &r_n);
                }
                let b = sigma_step(n, &t, &v[n], &a, &r_n)?;
                let next = Float::with_val(bits, &v[n] - &b);
                v.push(next);
            }
            v
        }
    };
    let mut values = values;
    values.truncate(n_target + 1);
    Ok(RecursionTrace {
        t,
        quantity,
        values,
        source: Source::FromRecursion,
    })
}

/// `R_{n+1}` from `R_n = a`, `R_{n-1} = b`.
fn big_r_step(n: usize, t: &Float, a: &Float, b: &Float) -> Result<Float> {
    let bits = a.prec();
    let e = e_term(n, t);
    let ab = Float::with_val(bits, a * b);
    let num = Float::with_val(bits, &e + &ab) + Float::with_val(bits, b * n as u64);
    let num = Float::with_val(bits, &e * &num);
    let mut den = Float::with_val(bits, &e * (n as u64 + 1));
    den += Float::with_val(bits, &ab * (2 * n as u64 + 1));
    den += Float::with_val(bits, a * &e);
    den += Float::with_val(bits, &ab * a);
    if den.is_zero() {
        return Err(Error::Degenerate {
            n,
            what: "R step denominator",
        });
    }
    Ok(num / den)
}

/// `σ_n - σ_{n+1}` as the root of the quadratic `σ` step nearest the linear
/// prediction from `r_n`.
fn sigma_step(n: usize, t: &Float, sigma_n: &Float, a: &Float, r_n: &Float) -> Result<Float> {
    let bits = a.prec();
    let e = e_term(n, t);
    let k = Float::with_val(bits, &e * n as u64);
    let c = Float::with_val(bits, sigma_n - parity_term(n, t) * 2u32);
    let a2 = Float::with_val(bits, a.square_ref());
    // c2 x² + c1 x + c0 = 0
    let c2 = Float::with_val(bits, &a2 * (n as u64 * n as u64))
        - Float::with_val(bits, &k * a)
        - Float::with_val(bits, &c * &a2);
    let c1 = -Float::with_val(bits, &k * Float::with_val(bits, &e + &a2))
        - Float::with_val(bits, &c * a) * Float::with_val(bits, &e * 2u32);
    let c0 = -Float::with_val(bits, &k * a) * &e - Float::with_val(bits, &c * &e) * &e;
    let den = Float::with_val(bits, a * Float::with_val(bits, r_n + n as u64));
    if den.is_zero() {
        return Err(Error::Degenerate {
            n,
            what: "R_{n-1}(n + r_n)",
        });
    }
    let guess = -Float::with_val(bits, &e * r_n) / den;
    let disc = Float::with_val(bits, c1.square_ref()) - Float::with_val(bits, &c2 * &c0) * 4u32;
    if c2.is_zero() && c1.is_zero() {
        return Err(Error::Degenerate {
            n,
            what: "sigma step coefficients",
        });
    }
    // A (near-)double root cannot be resolved better than half the working
    // precision by the quadratic formula; the linear prediction is exact
    // there. This happens at n = 1, where σ_0 = 0.
    let c1sq = Float::with_val(bits, c1.square_ref());
    if disc <= Float::with_val(bits, &c1sq >> (bits as i32 / 2)) {
        return Ok(guess);
    }
    let roots = if c2.is_zero() {
        vec![-Float::with_val(bits, &c0 / &c1)]
    } else {
        // q = -(c1 + sign(c1)√disc)/2, roots q/c2 and c0/q
        let sq = disc.sqrt();
        let q = if c1 >= 0 {
            -(Float::with_val(bits, &c1 + &sq)) / 2u32
        } else {
            (Float::with_val(bits, &sq - &c1)) / 2u32
        };
        let mut roots = vec![Float::with_val(bits, &q / &c2)];
        if !q.is_zero() {
            roots.push(Float::with_val(bits, &c0 / &q));
        }
        roots
    };
    let best = roots
        .into_iter()
        .min_by(|x, y| {
            let dx = Float::with_val(bits, x - &guess).abs();
            let dy = Float::with_val(bits, y - &guess).abs();
            dx.partial_cmp(&dy).expect("finite roots")
        })
        .expect("at least one root");
    Ok(best)
}

/// Per-index disagreement between a recursion trace and a factorization
/// trace of the same quantity.
#[derive(Clone, Debug)]
pub struct TraceComparison {
    pub quantity: Quantity,
    /// `|x_rec - x_hankel| / max(1, |x_hankel|)`.
    pub deviations: Vec<Float>,
    /// First index whose deviation exceeds the threshold.
    pub divergence_index: Option<usize>,
}

pub fn compare_traces(
    recursion: &RecursionTrace,
    hankel: &RecursionTrace,
    threshold: &Float,
) -> Result<TraceComparison> {
    if recursion.quantity != hankel.quantity {
        return Err(Error::domain("traces of different quantities"));
    }
    let len = recursion.values.len().min(hankel.values.len());
    let deviations: Vec<Float> = (0..len)
        .map(|n| crate::residual::mismatch(&recursion.values[n], &hankel.values[n]))
        .collect();
    let divergence_index = deviations.iter().position(|d| d > threshold);
    Ok(TraceComparison {
        quantity: recursion.quantity,
        deviations,
        divergence_index,
    })
}

/// Bits lost by the forward recursion at each index: the same recursion
/// is rerun at twice the precision and the relative difference is measured
/// against the unit roundoff of `prec`. This is the error-growth factor
/// `K(n)` in base-2 logarithm.
pub fn error_growth(
    quantity: Quantity,
    t: &Float,
    n_target: usize,
    prec: &PrecisionConfig,
) -> Result<Vec<f64>> {
    let lo = run_recursion(quantity, t, n_target, prec)?;
    let hi = run_recursion(quantity, t, n_target, &prec.doubled())?;
    let unit = prec.work_bits as f64;
    Ok(lo
        .values
        .iter()
        .zip(&hi.values)
        .map(|(a, b)| {
            let d = crate::residual::mismatch(&Float::with_val(b.prec(), a), b);
            (log2_abs(&d) + unit).max(0.0)
        })
        .collect())
}
