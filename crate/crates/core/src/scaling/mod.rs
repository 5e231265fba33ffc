//! Correspondence with the singularly perturbed Laguerre weight and the
//! double-scaling limits `s = (2n+1)t`.

pub mod constants;
pub mod series;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hankel::{
    gaussian_pivot_jets, gaussian_table, hermite_log_det, laguerre_pivot_jets, Factorization,
};
use crate::jet::Jet;
use crate::moments::{build_moment_table, WeightSpec};
use crate::precision::PrecisionConfig;
use crate::residual::{balance, mismatch, ResidualReport};

pub use series::{eval_series, Regime, SeriesExpansion, SeriesName, SeriesValue, Truncation};

/// Quantities of the weight `x^α e^{-x-t/x}` on `(0, ∞)`.
#[derive(Clone, Debug)]
pub struct LaguerreAux {
    pub t: Float,
    pub alpha: f64,
    pub n_max: usize,
    /// `ln D̃_n` for `n = 0..=n_max+1`.
    pub log_d: Vec<Float>,
    /// `H_n = t d/dt ln D̃_n` and its first two derivatives, `n = 0..=n_max+1`.
    pub big_h: Vec<Float>,
    pub d_big_h: Vec<Float>,
    pub d2_big_h: Vec<Float>,
    /// `a_n = -t d/dt ln h̃_n`, `n = 0..=n_max`.
    pub a: Vec<Float>,
}

/// Builds [`LaguerreAux`] from third-order pivot jets.
pub fn laguerre_aux(t: &Float, alpha: f64, n_max: usize, prec: &PrecisionConfig) -> Result<LaguerreAux> {
    let bits = prec.work_bits;
    let order = 3;
    let spec = WeightSpec::laguerre(Float::with_val(bits, t), alpha)?;
    let table = build_moment_table(&spec, -(order as i64), 2 * (n_max as i64 + 1), prec)?;
    let pivots = laguerre_pivot_jets(&table, n_max + 1, order)?;
    let t = Float::with_val(bits, t);
    let mut log_d = vec![Float::new(bits)];
    let mut big_h = vec![Float::new(bits)];
    let mut d_big_h = vec![Float::new(bits)];
    let mut d2_big_h = vec![Float::new(bits)];
    let mut a = Vec::with_capacity(n_max + 1);
    let mut acc = Jet::zero(order, bits);
    for (n, piv) in pivots.iter().enumerate() {
        let l = piv.ln();
        if n <= n_max {
            a.push(Float::with_val(bits, &t * l.deriv(1)) * -1i32);
        }
        acc = acc.add(&l);
        let (l1, l2, l3) = (acc.deriv(1), acc.deriv(2), acc.deriv(3));
        log_d.push(acc.value().clone());
        big_h.push(Float::with_val(bits, &t * &l1));
        d_big_h.push(Float::with_val(bits, &t * &l2) + &l1);
        d2_big_h.push(Float::with_val(bits, &t * &l3) + Float::with_val(bits, &l2 * 2u32));
    }
    Ok(LaguerreAux {
        t,
        alpha,
        n_max,
        log_d,
        big_h,
        d_big_h,
        d2_big_h,
        a,
    })
}

/// `D_{2n} = D̃_n(1/2)D̃_n(-1/2)`, `D_{2n+1} = D̃_n(1/2)D̃_{n+1}(-1/2)`, the
/// matching relations for `σ` and `H`, and `R_{2n} = 2a_n(-1/2)`,
/// `R_{2n+1} = 2a_n(1/2)`, for `0 ≤ m ≤ n`. The Gaussian side uses the
/// unsplit factorization so the two sides share no pivots.
pub fn laguerre_correspondence_check(
    t: &Float,
    n: usize,
    prec: &PrecisionConfig,
) -> Result<ResidualReport> {
    let bits = prec.work_bits;
    let top = 2 * n + 1;
    let table = gaussian_table(t, top, 1, prec)?;
    let pivots = gaussian_pivot_jets(&table, top, 1, Factorization::Unsplit)?;
    let tt = Float::with_val(bits, t);
    let mut log_d = vec![Float::new(bits)];
    let mut sigma = vec![Float::new(bits)];
    let mut big_r = Vec::with_capacity(top + 1);
    for piv in &pivots {
        let l = piv.ln();
        let r = Float::with_val(bits, &tt * l.deriv(1)) * -2i32;
        log_d.push(Float::with_val(bits, log_d.last().unwrap() + l.value()));
        sigma.push(Float::with_val(bits, sigma.last().unwrap() - &r));
        big_r.push(r);
    }
    let plus = laguerre_aux(t, 0.5, n, prec)?;
    let minus = laguerre_aux(t, -0.5, n, prec)?;
    let two = |x: Float| x * 2u32;
    let mut rep = ResidualReport::new();
    for m in 0..=n {
        let rhs = Float::with_val(bits, &plus.log_d[m] + &minus.log_d[m]);
        rep.push("D_2n product", m, t, mismatch(&log_d[2 * m], &rhs));
        let rhs = Float::with_val(bits, &plus.log_d[m] + &minus.log_d[m + 1]);
        rep.push("D_2n+1 product", m, t, mismatch(&log_d[2 * m + 1], &rhs));
        let rhs = two(Float::with_val(bits, &plus.big_h[m] + &minus.big_h[m]));
        rep.push("sigma_2n from H", m, t, mismatch(&sigma[2 * m], &rhs));
        let rhs = two(Float::with_val(bits, &plus.big_h[m] + &minus.big_h[m + 1]));
        rep.push("sigma_2n+1 from H", m, t, mismatch(&sigma[2 * m + 1], &rhs));
        rep.push("R_2n from a_n", m, t, mismatch(&big_r[2 * m], &two(minus.a[m].clone())));
        rep.push("R_2n+1 from a_n", m, t, mismatch(&big_r[2 * m + 1], &two(plus.a[m].clone())));
    }
    Ok(rep)
}

/// Residual of `(tH'')² = [n - (2n+α)H']² - 4[n(n+α) + tH' - H]H'(H'-1)`
/// for `H_n(t, α)` at each grid point.
pub fn h_equation_residual(
    n: usize,
    alpha: f64,
    t_grid: &[Float],
    prec: &PrecisionConfig,
) -> Result<Vec<Float>> {
    let bits = prec.work_bits;
    let al = Float::with_val(bits, alpha);
    t_grid
        .par_iter()
        .map(|t| {
            let aux = laguerre_aux(t, alpha, n, prec)?;
            let (h, dh, d2h) = (&aux.big_h[n], &aux.d_big_h[n], &aux.d2_big_h[n]);
            let nf = Float::with_val(bits, n);
            let lhs = Float::with_val(bits, t * d2h).square();
            let c = Float::with_val(bits, &nf * 2u32) + &al;
            let first = (Float::with_val(bits, &nf - Float::with_val(bits, &c * dh))).square();
            let mut bracket = Float::with_val(bits, &nf + &al) * &nf;
            bracket += Float::with_val(bits, t * dh);
            bracket -= h;
            let second = bracket * dh * Float::with_val(bits, dh - 1u32) * 4u32;
            Ok(balance(&[lhs, -first, second]))
        })
        .collect()
}

/// Finite-n counterparts of the scaled limits: even and odd subsequences.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ScaledQuantity {
    /// `R_{2n}(t)/t`
    C1,
    /// `R_{2n+1}(t)/t`
    C2,
    /// `σ_{2n}(t)`
    Sigma1,
    /// `σ_{2n+1}(t)`
    Sigma2,
    /// `D_{2n}(t)/D_{2n}(0)`
    Delta1,
    /// `D_{2n+1}(t)/D_{2n+1}(0)`
    Delta2,
}

impl ScaledQuantity {
    pub fn series_name(self) -> SeriesName {
        match self {
            ScaledQuantity::C1 => SeriesName::C1,
            ScaledQuantity::C2 => SeriesName::C2,
            ScaledQuantity::Sigma1 | ScaledQuantity::Sigma2 => SeriesName::Sigma1,
            ScaledQuantity::Delta1 | ScaledQuantity::Delta2 => SeriesName::Delta1,
        }
    }

    /// Hankel index sampled for limit index `n`.
    pub fn index(self, n: usize) -> usize {
        match self {
            ScaledQuantity::C1 | ScaledQuantity::Sigma1 | ScaledQuantity::Delta1 => 2 * n,
            _ => 2 * n + 1,
        }
    }

    pub fn is_delta(self) -> bool {
        matches!(self, ScaledQuantity::Delta1 | ScaledQuantity::Delta2)
    }
}

impl fmt::Display for ScaledQuantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScaledQuantity::C1 => "C1",
            ScaledQuantity::C2 => "C2",
            ScaledQuantity::Sigma1 => "sigma",
            ScaledQuantity::Sigma2 => "sigma2",
            ScaledQuantity::Delta1 => "Delta",
            ScaledQuantity::Delta2 => "Delta2",
        })
    }
}

impl FromStr for ScaledQuantity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "C1" => ScaledQuantity::C1,
            "C2" => ScaledQuantity::C2,
            "sigma" | "sigma1" => ScaledQuantity::Sigma1,
            "sigma2" => ScaledQuantity::Sigma2,
            "Delta" | "Delta1" => ScaledQuantity::Delta1,
            "Delta2" => ScaledQuantity::Delta2,
            _ => return Err(Error::domain(format!("unknown scaled quantity {s:?}"))),
        })
    }
}

#[derive(Clone, Debug)]
pub struct ScalingSample {
    pub n: usize,
    pub s: Float,
    pub t: Float,
    pub value: Float,
    pub quantity: ScaledQuantity,
}

impl ScalingSample {
    /// The value compared against the series: `ln` of the ratio for the
    /// determinant quantities.
    pub fn comparable(&self) -> Float {
        if self.quantity.is_delta() {
            Float::with_val(self.value.prec(), self.value.ln_ref())
        } else {
            self.value.clone()
        }
    }
}

/// `t = s/(2n+1)`.
pub fn scaled_t(n: usize, s: &Float, bits: u32) -> Float {
    Float::with_val(bits, s) / (2 * n as u64 + 1)
}

/// Samples `quantity` at limit index `n` and `t = s/(2n+1)`.
pub fn scaled_measurement(
    quantity: ScaledQuantity,
    n: usize,
    s: &Float,
    prec: &PrecisionConfig,
) -> Result<ScalingSample> {
    if !(*s > 0) {
        return Err(Error::domain("scaled measurements need s > 0"));
    }
    let bits = prec.work_bits;
    let t = scaled_t(n, s, bits);
    let m = quantity.index(n);
    let order = if quantity.is_delta() { 0 } else { 1 };
    let table = gaussian_table(&t, m, order, prec)?;
    let pivots = gaussian_pivot_jets(&table, m, order, Factorization::ParitySplit)?;
    let value = match quantity {
        ScaledQuantity::C1 | ScaledQuantity::C2 => {
            pivots[m].ln().deriv(1) * -2i32
        }
        ScaledQuantity::Sigma1 | ScaledQuantity::Sigma2 => {
            let mut acc = Float::new(bits);
            for p in &pivots[..m] {
                acc += p.ln().deriv(1);
            }
            acc * Float::with_val(bits, &t * 2u32)
        }
        _ => {
            let mut acc = Float::new(bits);
            for p in &pivots[..m] {
                acc += Float::with_val(bits, p.value().ln_ref());
            }
            (acc - hermite_log_det(m, bits)).exp()
        }
    };
    Ok(ScalingSample {
        n,
        s: Float::with_val(bits, s),
        t,
        value,
        quantity,
    })
}

/// The series of `quantity` at `s` in whichever regime has the smaller
/// next-term bound under optimal truncation.
pub fn series_reference(quantity: ScaledQuantity, s: &Float) -> Result<(Regime, SeriesValue)> {
    let name = quantity.series_name();
    let mut best: Option<(Regime, SeriesValue)> = None;
    for regime in [Regime::SmallS, Regime::LargeS] {
        let ser = SeriesExpansion::composite(name, regime)?;
        let v = eval_series(&ser, s, Truncation::Auto)?;
        if best.as_ref().is_none_or(|(_, b)| v.next_term_bound < b.next_term_bound) {
            best = Some((regime, v));
        }
    }
    Ok(best.expect("two regimes"))
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConvergenceFit {
    /// `|sample(n) - series| ≈ constant · n^{-rate}`.
    Rate { constant: f64, rate: f64 },
    /// Every deviation is below the tolerance.
    ConvergedToTolerance,
}

#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub quantity: ScaledQuantity,
    pub s: Float,
    pub regime: Regime,
    pub series: SeriesValue,
    pub samples: Vec<ScalingSample>,
    pub deviations: Vec<Float>,
    pub fit: ConvergenceFit,
}

impl ConvergenceReport {
    pub fn monotone_decreasing(&self) -> bool {
        self.deviations.windows(2).all(|w| w[1] < w[0])
    }

    /// Two-point Richardson estimate of the limit from the last two
    /// samples, assuming an `O(1/n)` correction.
    pub fn richardson(&self) -> Option<Float> {
        let k = self.samples.len();
        if k < 2 {
            return None;
        }
        let (a, b) = (&self.samples[k - 2], &self.samples[k - 1]);
        let (na, nb) = (a.n as f64, b.n as f64);
        let (va, vb) = (a.comparable(), b.comparable());
        let bits = va.prec();
        let w = Float::with_val(bits, nb / (nb - na));
        let diff = Float::with_val(bits, &vb - &va);
        Some(vb + diff * (w - 1u32))
    }

    /// Final deviation against `max(next_term_bound, c/n)`.
    pub fn within(&self, c_over_n: f64) -> bool {
        let (Some(dev), Some(last)) = (self.deviations.last(), self.samples.last()) else {
            return false;
        };
        let floor = Float::with_val(dev.prec(), c_over_n / last.n as f64);
        let bound = if self.series.next_term_bound > floor {
            self.series.next_term_bound.clone()
        } else {
            floor
        };
        *dev <= bound
    }
}

/// Samples `quantity` at each `n` (concurrently), compares with the series
/// at `s`, and fits `C n^{-p}` to the deviations by log-log regression.
pub fn convergence_report(
    quantity: ScaledQuantity,
    s: &Float,
    n_list: &[usize],
    prec: &PrecisionConfig,
) -> Result<ConvergenceReport> {
    if n_list.len() < 3 || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("n_list must be ascending with at least three entries"));
    }
    let bits = prec.work_bits;
    let s = Float::with_val(bits, s);
    let (regime, series) = series_reference(quantity, &s)?;
    let samples = n_list
        .par_iter()
        .map(|&n| scaled_measurement(quantity, n, &s, prec))
        .collect::<Result<Vec<_>>>()?;
    let deviations: Vec<Float> = samples
        .iter()
        .map(|x| Float::with_val(bits, x.comparable() - &series.value).abs())
        .collect();
    let tol = prec.tolerance();
    let fit = if deviations.iter().all(|d| *d <= tol) {
        ConvergenceFit::ConvergedToTolerance
    } else {
        let pts: Vec<(f64, f64)> = n_list
            .iter()
            .zip(&deviations)
            .map(|(&n, d)| ((n as f64).ln(), crate::precision::log2_abs(d) * std::f64::consts::LN_2))
            .collect();
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let slope = sxy / sxx;
        ConvergenceFit::Rate {
            constant: (my - slope * mx).exp(),
            rate: -slope,
        }
    };
    Ok(ConvergenceReport {
        quantity,
        s,
        regime,
        series,
        samples,
        deviations,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::float::Constant;

    fn prec() -> PrecisionConfig {
        PrecisionConfig::new(256, 64, 0).unwrap()
    }

    #[test]
    fn worked_factorization_at_t1() {
        let p = prec();
        let bits = p.work_bits;
        let t = p.real(1.0);
        let pi = Float::with_val(bits, Constant::Pi);
        let minus = laguerre_aux(&t, -0.5, 1, &p).unwrap();
        let plus = laguerre_aux(&t, 0.5, 1, &p).unwrap();
        let root_pi_e2 = Float::with_val(bits, pi.sqrt_ref()) * Float::with_val(bits, -2).exp();
        let close = |a: &Float, b: Float| mismatch(a, &b.ln()) < p.tolerance();
        assert!(close(&minus.log_d[1], root_pi_e2.clone()));
        assert!(close(&plus.log_d[1], root_pi_e2 * 1.5f64));
        let table = gaussian_table(&t, 1, 0, &p).unwrap();
        let ln_d2 = crate::hankel::hankel_determinant(&table, 2, &p).unwrap();
        assert!(close(&ln_d2, pi * Float::with_val(bits, -4).exp() * 1.5f64));
    }

    #[test]
    fn a0_is_r0_over_two() {
        let p = prec();
        let t = p.real(0.7);
        let minus = laguerre_aux(&t, -0.5, 0, &p).unwrap();
        let r0 = Float::with_val(p.work_bits, t.sqrt_ref());
        assert!(mismatch(&minus.a[0], &r0) < p.tolerance());
    }

    #[test]
    fn correspondence_at_small_order() {
        let p = prec();
        let rep = laguerre_correspondence_check(&p.real(0.5), 2, &p).unwrap();
        assert_eq!(rep.identities().len(), 6);
        assert!(rep.all_within(&p.tolerance()), "{:?}", rep.worst());
    }

    #[test]
    fn h_equation_worked_values() {
        let p = prec();
        let r = h_equation_residual(1, -0.5, &[p.real(1.0)], &p).unwrap();
        assert!(r[0] < p.tolerance());
        let aux = laguerre_aux(&p.real(1.0), -0.5, 1, &p).unwrap();
        assert!((aux.big_h[1].to_f64() + 1.0).abs() < 1e-60);
        assert!((aux.d_big_h[1].to_f64() + 0.5).abs() < 1e-60);
        let zero = h_equation_residual(0, 0.5, &[p.real(2.0)], &p).unwrap();
        assert!(zero[0].is_zero());
    }

    #[test]
    fn sigma_sample_closed_form_n1() {
        let p = prec();
        let bits = p.work_bits;
        let s = p.real(2.0);
        let x = scaled_measurement(ScaledQuantity::Sigma1, 1, &s, &p).unwrap();
        let t = Float::with_val(bits, &s / 3u32);
        let rt = Float::with_val(bits, t.sqrt_ref());
        let expect = Float::with_val(bits, &rt * -2i32)
            - Float::with_val(bits, &t * 4u32) / (Float::with_val(bits, &rt * 2u32) + 1u32);
        assert!(mismatch(&x.value, &expect) < p.tolerance());
        assert_eq!(x.t, t);
    }

    #[test]
    fn delta_sample_tends_to_one() {
        let p = prec();
        let x = scaled_measurement(ScaledQuantity::Delta1, 5, &p.real(1e-70), &p).unwrap();
        assert!((x.value.to_f64() - 1.0).abs() < 1e-25);
    }

    #[test]
    fn report_rejects_short_lists() {
        let p = prec();
        assert!(convergence_report(ScaledQuantity::Sigma1, &p.real(1.0), &[4, 8], &p).is_err());
        assert!(convergence_report(ScaledQuantity::Sigma1, &p.real(1.0), &[8, 4, 16], &p).is_err());
    }
}
