//! Exact moments of the perturbed Gaussian and Laguerre weights.
//!
//! Every moment reduces to `∫₀^∞ y^{ν-1} e^{-y-t/y} dy = 2 t^{ν/2} K_ν(2√t)`.
//! For the two weight families handled here `ν` is always a half-integer, so
//! `K_ν` is elementary: `K_{1/2}(z) = √(π/2z) e^{-z}` followed by the upward
//! recurrence `K_{ν+1} = K_{ν-1} + (2ν/z) K_ν`. The recurrence grows in the
//! direction it is run and is therefore stable.

use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::precision::PrecisionConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightFamily {
    /// `e^{-x² - t/x²}` on the real line.
    GaussianSingular,
    /// `x^α e^{-x - t/x}` on the half line.
    LaguerreSingular,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightSpec {
    pub family: WeightFamily,
    pub t: Float,
    /// Laguerre exponent; ignored by the Gaussian family.
    pub alpha: f64,
}

impl WeightSpec {
    pub fn gaussian(t: Float) -> Result<Self> {
        check_t(&t)?;
        Ok(WeightSpec {
            family: WeightFamily::GaussianSingular,
            t,
            alpha: 0.0,
        })
    }

    pub fn laguerre(t: Float, alpha: f64) -> Result<Self> {
        check_t(&t)?;
        if !(alpha > -1.0) {
            return Err(Error::domain(format!("Laguerre exponent {alpha} must exceed -1")));
        }
        Ok(WeightSpec {
            family: WeightFamily::LaguerreSingular,
            t,
            alpha,
        })
    }

    /// `dμ_k/dt = -μ_{k-shift}`: the perturbation is `t/x²` for the
    /// Gaussian family and `t/x` for the Laguerre family.
    pub fn derivative_shift(&self) -> i64 {
        match self.family {
            WeightFamily::GaussianSingular => 2,
            WeightFamily::LaguerreSingular => 1,
        }
    }

    pub fn is_unperturbed(&self) -> bool {
        self.t.is_zero()
    }

    /// Twice the Bessel order for Laguerre moment `k`, when it is an odd
    /// integer (half-integer order).
    fn laguerre_twice_order(&self, k: i64) -> Option<i64> {
        let twice = 2.0 * (k as f64 + self.alpha + 1.0);
        if twice.fract() == 0.0 && (twice as i64).rem_euclid(2) == 1 {
            Some(twice as i64)
        } else {
            None
        }
    }
}

fn check_t(t: &Float) -> Result<()> {
    if t.is_nan() || *t < 0 {
        return Err(Error::domain("perturbation t must be non-negative"));
    }
    Ok(())
}

/// `K_{ν}(z)` for half-integer `ν = twice_nu / 2 ≥ 1/2`.
pub fn bessel_k_half(twice_nu: i64, z: &Float, prec: &PrecisionConfig) -> Result<Float> {
    if twice_nu < 1 || twice_nu % 2 == 0 {
        return Err(Error::domain(format!(
            "Bessel order {twice_nu}/2 is not a positive half-integer"
        )));
    }
    if *z <= 0 {
        return Err(Error::domain("Bessel K argument must be positive"));
    }
    let seq = bessel_k_half_sequence(z, ((twice_nu + 1) / 2) as usize, prec.work_bits);
    Ok(seq.into_iter().last().expect("non-empty sequence"))
}

/// `[K_{1/2}(z), K_{3/2}(z), ..., K_{count-1/2}(z)]` from one recurrence pass.
pub(crate) fn bessel_k_half_sequence(z: &Float, count: usize, bits: u32) -> Vec<Float> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    let pi = Float::with_val(bits, Constant::Pi);
    let two_z = Float::with_val(bits, z * 2u32);
    let mut k_half = Float::with_val(bits, &pi / &two_z);
    k_half.sqrt_mut();
    k_half *= Float::with_val(bits, -z).exp();
    // K_{-1/2} = K_{1/2}
    let mut prev = k_half.clone();
    let mut cur = k_half;
    out.push(cur.clone());
    for j in 1..count {
        // nu = j - 1/2, K_{nu+1} = K_{nu-1} + (2 nu / z) K_nu
        let two_nu = (2 * j - 1) as u32;
        let mut next = Float::with_val(bits, &cur * two_nu);
        next /= z;
        next += &prev;
        prev = cur;
        cur = next;
        out.push(cur.clone());
    }
    out
}

/// Moment `μ_k(t)` of the weight.
pub fn eval_moment(spec: &WeightSpec, k: i64, prec: &PrecisionConfig) -> Result<Float> {
    let table = build_moment_table(spec, k, k, prec)?;
    Ok(table.values[0].clone())
}

/// `d^order μ_k / dt^order` for `order ∈ {1, 2}`.
pub fn eval_moment_derivative(
    spec: &WeightSpec,
    k: i64,
    order: u32,
    prec: &PrecisionConfig,
) -> Result<Float> {
    if !(1..=2).contains(&order) {
        return Err(Error::domain(format!("moment derivative order {order} is not 1 or 2")));
    }
    if spec.is_unperturbed() {
        return Err(Error::domain("moment derivatives need t > 0"));
    }
    let shifted = k - spec.derivative_shift() * order as i64;
    let mu = eval_moment(spec, shifted, prec)?;
    Ok(if order % 2 == 1 { -mu } else { mu })
}

/// Moments `μ_{k_min..=k_max}` with first derivatives where the table
/// reaches far enough down to express them.
#[derive(Clone, Debug)]
pub struct MomentTable {
    pub spec: WeightSpec,
    pub k_min: i64,
    pub k_max: i64,
    pub values: Vec<Float>,
    pub d_values: Vec<Option<Float>>,
}

pub fn build_moment_table(
    spec: &WeightSpec,
    k_min: i64,
    k_max: i64,
    prec: &PrecisionConfig,
) -> Result<MomentTable> {
    if k_min > k_max {
        return Err(Error::domain(format!("empty moment range {k_min}..={k_max}")));
    }
    let bits = prec.work_bits;
    let values: Vec<Float> = if spec.is_unperturbed() {
        (k_min..=k_max)
            .map(|k| unperturbed_moment(spec, k, bits))
            .collect::<Result<_>>()?
    } else {
        perturbed_moments(spec, k_min, k_max, bits)?
    };
    let shift = spec.derivative_shift();
    let d_values = (k_min..=k_max)
        .map(|k| {
            let src = k - shift;
            if spec.is_unperturbed() || src < k_min {
                None
            } else {
                Some(Float::with_val(bits, -&values[(src - k_min) as usize]))
            }
        })
        .collect();
    Ok(MomentTable {
        spec: spec.clone(),
        k_min,
        k_max,
        values,
        d_values,
    })
}

fn unperturbed_moment(spec: &WeightSpec, k: i64, bits: u32) -> Result<Float> {
    match spec.family {
        WeightFamily::GaussianSingular => {
            if k % 2 != 0 {
                return Ok(Float::new(bits));
            }
            if k < 0 {
                return Err(Error::domain(format!(
                    "Gaussian moment {k} diverges without the perturbation"
                )));
            }
            // Γ(m + 1/2)
            let arg = Float::with_val(bits, k / 2) + Float::with_val(bits, 0.5);
            Ok(arg.gamma())
        }
        WeightFamily::LaguerreSingular => {
            let arg = Float::with_val(bits, k) + Float::with_val(bits, spec.alpha + 1.0);
            if arg <= 0 {
                return Err(Error::domain(format!(
                    "Laguerre moment {k} diverges without the perturbation"
                )));
            }
            Ok(arg.gamma())
        }
    }
}

/// Shared recurrence pass for every index of the range.
fn perturbed_moments(spec: &WeightSpec, k_min: i64, k_max: i64, bits: u32) -> Result<Vec<Float>> {
    // twice the Bessel order for each index (None for odd Gaussian moments)
    let orders: Vec<Option<i64>> = (k_min..=k_max)
        .map(|k| match spec.family {
            WeightFamily::GaussianSingular => {
                if k % 2 != 0 {
                    Ok(None)
                } else {
                    Ok(Some(k + 1))
                }
            }
            WeightFamily::LaguerreSingular => spec
                .laguerre_twice_order(k)
                .map(Some)
                .ok_or_else(|| {
                    Error::domain(format!(
                        "Laguerre exponent {} gives a non-half-integer Bessel order",
                        spec.alpha
                    ))
                }),
        })
        .collect::<Result<_>>()?;
    let max_abs = orders.iter().flatten().map(|o| o.abs()).max().unwrap_or(1);
    let mut sqrt_t = Float::with_val(bits, &spec.t);
    sqrt_t.sqrt_mut();
    let z = Float::with_val(bits, &sqrt_t * 2u32);
    let ks = bessel_k_half_sequence(&z, ((max_abs + 1) / 2) as usize, bits);
    let quarter = Float::with_val(bits, sqrt_t.sqrt_ref());
    Ok(orders
        .into_iter()
        .map(|o| match o {
            None => Float::new(bits),
            Some(twice_nu) => {
                // 2 t^{ν/2} K_|ν|(2√t) with t^{ν/2} = (t^{1/4})^{2ν}
                let idx = ((twice_nu.abs() - 1) / 2) as usize;
                let mut v = Float::with_val(bits, (&quarter).pow(twice_nu as i32));
                v *= &ks[idx];
                v *= 2u32;
                v
            }
        })
        .collect())
}

impl MomentTable {
    pub fn t(&self) -> &Float {
        &self.spec.t
    }

    pub fn prec(&self) -> u32 {
        self.values[0].prec()
    }

    pub fn get(&self, k: i64) -> Option<&Float> {
        if k < self.k_min || k > self.k_max {
            None
        } else {
            Some(&self.values[(k - self.k_min) as usize])
        }
    }

    pub fn mu(&self, k: i64) -> &Float {
        self.get(k)
            .unwrap_or_else(|| panic!("moment {k} outside {}..={}", self.k_min, self.k_max))
    }

    pub fn d_mu(&self, k: i64) -> Option<&Float> {
        if k < self.k_min || k > self.k_max {
            None
        } else {
            self.d_values[(k - self.k_min) as usize].as_ref()
        }
    }

    /// Fails unless indices `need_min..=need_max` are all present.
    pub fn require(&self, need_min: i64, need_max: i64) -> Result<()> {
        if need_min < self.k_min || need_max > self.k_max {
            return Err(Error::MomentRange {
                have_min: self.k_min,
                have_max: self.k_max,
                need_min,
                need_max,
            });
        }
        Ok(())
    }

    /// Taylor jet of `μ_k` in `t` up to `order`, using
    /// `d^j μ_k/dt^j = (-1)^j μ_{k - j·shift}`.
    pub fn jet(&self, k: i64, order: usize) -> Jet {
        let shift = self.spec.derivative_shift();
        let mut coeffs = Vec::with_capacity(order + 1);
        let mut fact = 1u64;
        for j in 0..=order {
            if j > 0 {
                fact *= j as u64;
            }
            let mu = self.mu(k - shift * j as i64);
            let mut c = Float::with_val(self.prec(), mu / fact);
            if j % 2 == 1 {
                c = -c;
            }
            coeffs.push(c);
        }
        Jet::from_coeffs(coeffs)
    }

    pub fn to_json(&self, prec: &PrecisionConfig) -> MomentTableJson {
        let family = match self.spec.family {
            WeightFamily::GaussianSingular => "gaussian",
            WeightFamily::LaguerreSingular => "laguerre",
        };
        MomentTableJson {
            family: family.to_string(),
            t: prec.format(&self.spec.t),
            alpha: self.spec.alpha,
            k: (self.k_min..=self.k_max).collect(),
            mu: self.values.iter().map(|v| prec.format(v)).collect(),
            dmu: self
                .d_values
                .iter()
                .map(|d| d.as_ref().map(|v| prec.format(v)))
                .collect(),
        }
    }
}

/// Serialized form of a [`MomentTable`]; reals are fixed-digit decimal
/// strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentTableJson {
    pub family: String,
    pub t: String,
    pub alpha: f64,
    pub k: Vec<i64>,
    pub mu: Vec<String>,
    pub dmu: Vec<Option<String>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prec() -> PrecisionConfig {
        PrecisionConfig::new(256, 64, 0).unwrap()
    }

    fn sqrt_pi(bits: u32) -> Float {
        Float::with_val(bits, Constant::Pi).sqrt()
    }

    fn assert_rel(a: &Float, b: &Float, tol_bits: i32) {
        let diff = Float::with_val(a.prec(), a - b).abs();
        let scale = Float::with_val(a.prec(), b.abs_ref()).max(&Float::with_val(a.prec(), 1e-300));
        let rel = diff / scale;
        let tol = Float::with_val(a.prec(), 1) >> tol_bits;
        assert!(rel <= tol, "relative error {} exceeds 2^-{tol_bits}", rel.to_f64());
    }

    #[test]
    fn bessel_closed_forms() {
        let p = prec();
        let bits = p.work_bits;
        for zf in [0.25, 1.0, 3.7, 40.0] {
            let z = Float::with_val(bits, zf);
            let base = {
                let mut b = Float::with_val(bits, Constant::Pi) / Float::with_val(bits, &z * 2u32);
                b.sqrt_mut();
                b * Float::with_val(bits, -&z).exp()
            };
            let inv = Float::with_val(bits, 1u32) / &z;
            let k1 = bessel_k_half(1, &z, &p).unwrap();
            assert_rel(&k1, &base, 250);
            let k3 = bessel_k_half(3, &z, &p).unwrap();
            let expect3 = Float::with_val(bits, &base * Float::with_val(bits, &inv + 1u32));
            assert_rel(&k3, &expect3, 248);
            let k5 = bessel_k_half(5, &z, &p).unwrap();
            let poly = Float::with_val(bits, 1u32)
                + Float::with_val(bits, &inv * 3u32)
                + Float::with_val(bits, inv.square_ref()) * 3u32;
            let expect5 = Float::with_val(bits, &base * poly);
            assert_rel(&k5, &expect5, 246);
        }
    }

    #[test]
    fn bessel_domain_errors() {
        let p = prec();
        let z = p.real(1.0);
        assert!(bessel_k_half(2, &z, &p).is_err());
        assert!(bessel_k_half(-1, &z, &p).is_err());
        assert!(bessel_k_half(1, &p.real(0.0), &p).is_err());
        assert!(bessel_k_half(1, &p.real(-1.0), &p).is_err());
    }

    #[test]
    fn gaussian_moment_examples() {
        let p = prec();
        let bits = p.work_bits;
        let g1 = WeightSpec::gaussian(p.real(1.0)).unwrap();
        let e2 = Float::with_val(bits, -2).exp();
        let mu0_expect = Float::with_val(bits, sqrt_pi(bits) * &e2);
        assert_rel(&eval_moment(&g1, 0, &p).unwrap(), &mu0_expect, 250);
        assert_rel(&eval_moment(&g1, -2, &p).unwrap(), &mu0_expect, 250);
        assert!(eval_moment(&g1, 3, &p).unwrap().is_zero());
        assert!(eval_moment(&g1, -5, &p).unwrap().is_zero());

        let g0 = WeightSpec::gaussian(p.real(0.0)).unwrap();
        let half_sqrt_pi = sqrt_pi(bits) / 2u32;
        assert_rel(&eval_moment(&g0, 2, &p).unwrap(), &half_sqrt_pi, 250);
        assert!(eval_moment(&g0, -2, &p).is_err());
    }

    #[test]
    fn moment_derivative_examples() {
        let p = prec();
        let bits = p.work_bits;
        let g1 = WeightSpec::gaussian(p.real(1.0)).unwrap();
        let base = Float::with_val(bits, sqrt_pi(bits) * Float::with_val(bits, -2).exp());
        let d1 = eval_moment_derivative(&g1, 2, 1, &p).unwrap();
        assert_rel(&d1, &Float::with_val(bits, -&base), 250);
        let d2 = eval_moment_derivative(&g1, 0, 2, &p).unwrap();
        assert_rel(&d2, &Float::with_val(bits, &base * 1.5f64), 248);
        // d/dt μ_0 = -√π t^{-1/2} e^{-2√t} at t = 2.25
        let t = p.real(2.25);
        let g = WeightSpec::gaussian(t).unwrap();
        let expect = -Float::with_val(bits, sqrt_pi(bits) / 1.5f64) * Float::with_val(bits, -3).exp();
        assert_rel(&eval_moment_derivative(&g, 0, 1, &p).unwrap(), &expect, 248);
        assert!(eval_moment_derivative(&g, 0, 3, &p).is_err());
        let g0 = WeightSpec::gaussian(p.real(0.0)).unwrap();
        assert!(eval_moment_derivative(&g0, 2, 1, &p).is_err());
    }

    #[test]
    fn table_examples() {
        let p = prec();
        let bits = p.work_bits;
        let g1 = WeightSpec::gaussian(p.real(1.0)).unwrap();
        let tab = build_moment_table(&g1, -2, 4, &p).unwrap();
        let base = Float::with_val(bits, sqrt_pi(bits) * Float::with_val(bits, -2).exp());
        assert_rel(tab.mu(0), &base, 250);
        assert_rel(tab.mu(2), &Float::with_val(bits, &base * 1.5f64), 248);
        for k in [-1, 1, 3] {
            assert!(tab.mu(k).is_zero());
        }
        for k in 0..=4 {
            let d = tab.d_mu(k).unwrap();
            assert_eq!(Float::with_val(bits, d + tab.mu(k - 2)), 0);
        }
        assert!(tab.d_mu(-2).is_none());

        let g0 = WeightSpec::gaussian(p.real(0.0)).unwrap();
        let tab0 = build_moment_table(&g0, 0, 6, &p).unwrap();
        for m in 0..=3i64 {
            let expect = (Float::with_val(bits, m) + 0.5f64).gamma();
            assert_rel(tab0.mu(2 * m), &expect, 250);
        }

        let lag = WeightSpec::laguerre(p.real(1.0), -0.5).unwrap();
        let tabl = build_moment_table(&lag, 0, 2, &p).unwrap();
        assert_rel(tabl.mu(0), &base, 250);
        assert!(build_moment_table(&g1, 3, 2, &p).is_err());
    }

    #[test]
    fn laguerre_matches_gaussian_sublattices() {
        let p = prec();
        let t = p.parse("0.37").unwrap();
        let g = build_moment_table(&WeightSpec::gaussian(t.clone()).unwrap(), -8, 12, &p).unwrap();
        let lm = build_moment_table(&WeightSpec::laguerre(t.clone(), -0.5).unwrap(), -4, 6, &p).unwrap();
        let lp = build_moment_table(&WeightSpec::laguerre(t, 0.5).unwrap(), -4, 5, &p).unwrap();
        for k in -4..=5i64 {
            assert_rel(lm.mu(k), g.mu(2 * k), 248);
            assert_rel(lp.mu(k), g.mu(2 * k + 2), 248);
        }
    }

    #[test]
    fn laguerre_rejects_general_alpha() {
        let p = prec();
        let lag = WeightSpec::laguerre(p.real(1.0), 0.3).unwrap();
        assert!(eval_moment(&lag, 0, &p).is_err());
        let lag0 = WeightSpec::laguerre(p.real(0.0), 0.3).unwrap();
        assert!(eval_moment(&lag0, 0, &p).is_ok());
        assert!(WeightSpec::laguerre(p.real(1.0), -1.0).is_err());
        assert!(WeightSpec::gaussian(p.real(-1.0)).is_err());
    }

    #[test]
    fn json_keys() {
        let p = prec();
        let tab = build_moment_table(&WeightSpec::gaussian(p.real(1.0)).unwrap(), 0, 2, &p).unwrap();
        let v = serde_json::to_value(tab.to_json(&p)).unwrap();
        for key in ["family", "t", "alpha", "k", "mu", "dmu"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
    }
}
