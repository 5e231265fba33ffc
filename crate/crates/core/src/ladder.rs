//! Auxiliary quantities `R_n`, `r_n`, `σ_n` and the ladder-operator
//! identities they satisfy.
//!
//! Everything is read off the pivot jets: `R_n = -2t (ln h_n)'`,
//! `r_n = 2β_n - n`, `σ_n = -Σ_{j<n} R_j = 2t (ln D_n)'`. The pivots are
//! factored with order-3 jets so that `R_n''` and `r_n''` are exact.

use rug::Float;

use crate::error::{Error, Result};
use crate::hankel::{
    compute_recurrence, gaussian_pivot_jets, gaussian_table, polynomial_coeffs, Factorization,
    RecurrenceData,
};
use crate::jet::Jet;
use crate::moments::MomentTable;
use crate::precision::PrecisionConfig;
use crate::residual::{balance, ResidualReport};

/// Jet order carried through the factorization.
pub const AUX_JET_ORDER: usize = 3;

/// `(-1)^n`.
pub fn parity_sign(n: usize) -> i64 {
    if n.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// `(1 - (-1)^n) t`.
pub fn parity_term(n: usize, t: &Float) -> Float {
    if n.is_multiple_of(2) {
        Float::new(t.prec())
    } else {
        Float::with_val(t.prec(), t * 2u32)
    }
}

/// `R_n`, `r_n`, `σ_n`, `β_n`, `p(n,t)` with their first two `t`-derivatives.
#[derive(Clone, Debug)]
pub struct AuxQuantities {
    pub t: Float,
    pub n_max: usize,
    /// `R_0..=R_{n_max}` and derivatives.
    pub big_r: Vec<Float>,
    pub d_big_r: Vec<Float>,
    pub d2_big_r: Vec<Float>,
    /// `r_0..=r_{n_max}` and derivatives.
    pub r: Vec<Float>,
    pub dr: Vec<Float>,
    pub d2r: Vec<Float>,
    /// `σ_0..=σ_{n_max+1}` and derivatives.
    pub sigma: Vec<Float>,
    pub dsigma: Vec<Float>,
    pub d2sigma: Vec<Float>,
    /// `β_0..=β_{n_max}` and first derivatives.
    pub beta: Vec<Float>,
    pub dbeta: Vec<Float>,
    /// `p(0,t)..=p(n_max+1,t)` and first derivatives.
    pub p: Vec<Float>,
    pub dp: Vec<Float>,
}

/// `A_n(z) = 2 + R_n/z²`, `B_n(z) = r_n/z + (1-(-1)^n)t/z³`.
#[derive(Clone, Debug)]
pub struct LadderCoefficients {
    pub n: usize,
    pub big_r: Float,
    pub r: Float,
    pub parity_term: Float,
}

impl LadderCoefficients {
    pub fn a(&self, z: &Float) -> Float {
        let bits = z.prec();
        let z2 = Float::with_val(bits, z.square_ref());
        Float::with_val(bits, &self.big_r / &z2) + 2u32
    }

    pub fn b(&self, z: &Float) -> Float {
        let bits = z.prec();
        let z3 = Float::with_val(bits, z * Float::with_val(bits, z.square_ref()));
        Float::with_val(bits, &self.r / z) + Float::with_val(bits, &self.parity_term / &z3)
    }

    /// `dA_n/dz`.
    pub fn da(&self, z: &Float) -> Float {
        let bits = z.prec();
        let z3 = Float::with_val(bits, z * Float::with_val(bits, z.square_ref()));
        -Float::with_val(bits, &self.big_r * 2u32) / z3
    }

    /// `dB_n/dz`.
    pub fn db(&self, z: &Float) -> Float {
        let bits = z.prec();
        let z2 = Float::with_val(bits, z.square_ref());
        let z4 = Float::with_val(bits, z2.square_ref());
        -Float::with_val(bits, &self.r / &z2) - Float::with_val(bits, &self.parity_term * 3u32) / z4
    }
}

impl AuxQuantities {
    pub fn coefficients(&self, n: usize) -> LadderCoefficients {
        LadderCoefficients {
            n,
            big_r: self.big_r[n].clone(),
            r: self.r[n].clone(),
            parity_term: parity_term(n, &self.t),
        }
    }

    /// Builds every quantity from jets of `h_0..=h_{n_max}` of order ≥ 3.
    pub fn from_pivot_jets(t: &Float, pivots: &[Jet]) -> Result<Self> {
        let n_max = pivots.len() - 1;
        let bits = t.prec();
        if *t <= 0 {
            return Err(Error::domain("auxiliary quantities need t > 0"));
        }
        if pivots.iter().any(|p| p.order() < AUX_JET_ORDER) {
            return Err(Error::domain("pivot jets must carry third derivatives"));
        }
        let tj = Jet::variable(t, AUX_JET_ORDER - 1);
        let big_r: Vec<Jet> = pivots
            .iter()
            .map(|h| tj.mul(&h.ln().differentiate()).scale_i(-2))
            .collect();
        let mut beta = vec![Jet::zero(AUX_JET_ORDER, bits)];
        for n in 1..=n_max {
            beta.push(pivots[n].div(&pivots[n - 1]));
        }
        let r: Vec<Jet> = beta
            .iter()
            .enumerate()
            .map(|(n, b)| b.scale_i(2).add_scalar(&Float::with_val(bits, -(n as i64))))
            .collect();
        let mut sigma = vec![Jet::zero(AUX_JET_ORDER - 1, bits)];
        for n in 0..=n_max {
            sigma.push(sigma[n].sub(&big_r[n]));
        }
        let mut p = vec![Jet::zero(AUX_JET_ORDER, bits); 2];
        for n in 1..=n_max {
            p.push(p[n].sub(&beta[n]));
        }
        let col = |v: &[Jet], k: usize| v.iter().map(|j| j.deriv(k)).collect::<Vec<Float>>();
        Ok(AuxQuantities {
            t: t.clone(),
            n_max,
            d_big_r: col(&big_r, 1),
            d2_big_r: col(&big_r, 2),
            big_r: col(&big_r, 0),
            dr: col(&r, 1),
            d2r: col(&r, 2),
            r: col(&r, 0),
            dsigma: col(&sigma, 1),
            d2sigma: col(&sigma, 2),
            sigma: col(&sigma, 0),
            dbeta: col(&beta, 1),
            beta: col(&beta, 0),
            dp: col(&p, 1),
            p: col(&p, 0),
        })
    }
}

/// Auxiliary quantities for the recurrence data `rec`. The table must reach
/// down to index `-6` so that third derivatives of the pivots exist.
pub fn compute_aux(
    rec: &RecurrenceData,
    table: &MomentTable,
    prec: &PrecisionConfig,
) -> Result<AuxQuantities> {
    if table.t() != &rec.t {
        return Err(Error::domain("recurrence data and moment table disagree on t"));
    }
    let pivots = gaussian_pivot_jets(table, rec.n_max, AUX_JET_ORDER, Factorization::ParitySplit)?;
    let t = Float::with_val(prec.work_bits, &rec.t);
    AuxQuantities::from_pivot_jets(&t, &pivots)
}

/// Table, recurrence data and auxiliary quantities at one `t`.
pub fn compute_at(
    t: &Float,
    n_max: usize,
    prec: &PrecisionConfig,
) -> Result<(RecurrenceData, AuxQuantities)> {
    let table = gaussian_table(t, n_max, AUX_JET_ORDER, prec)?;
    let rec = compute_recurrence(&table, n_max, prec)?;
    let aux = compute_aux(&rec, &table, prec)?;
    Ok((rec, aux))
}

/// Default ladder sample points `±1/2, ±1, ±2`.
pub fn default_z_samples(bits: u32) -> Vec<Float> {
    [0.5, -0.5, 1.0, -1.0, 2.0, -2.0]
        .iter()
        .map(|&z| Float::with_val(bits, z))
        .collect()
}

fn v_prime(z: &Float, t: &Float) -> Float {
    let bits = z.prec();
    let z3 = Float::with_val(bits, z * Float::with_val(bits, z.square_ref()));
    Float::with_val(bits, z * 2u32) - Float::with_val(bits, t * 2u32) / z3
}

fn check_z(z_samples: &[Float]) -> Result<()> {
    if z_samples.iter().any(|z| z.is_zero()) {
        return Err(Error::domain("ladder samples must avoid z = 0"));
    }
    Ok(())
}

/// Compatibility conditions at the default samples and the coefficient
/// identities they imply, for `1 ≤ n ≤ n_max - 1`.
pub fn check_s_identities(
    aux: &AuxQuantities,
    rec: &RecurrenceData,
    prec: &PrecisionConfig,
) -> Result<ResidualReport> {
    if aux.n_max < 2 || rec.n_max < aux.n_max {
        return Err(Error::domain("identity checks need n_max ≥ 2 and matching data"));
    }
    let bits = prec.work_bits;
    let t = &aux.t;
    let mut rep = ResidualReport::new();
    for n in 1..aux.n_max {
        let sgn = parity_sign(n);
        let nf = Float::with_val(bits, n);
        let beta = &rec.beta[n];
        let (r, big_r, big_r1) = (&aux.r[n], &aux.big_r[n], &aux.big_r[n - 1]);
        let sum_r = Float::with_val(bits, -&aux.sigma[n]);
        let par2 = Float::with_val(bits, parity_term(n, t) * 2u32);
        let r2 = Float::with_val(bits, r.square_ref());

        rep.push(
            "R_n = r_{n+1} + r_n",
            n,
            t,
            balance(&[big_r.clone(), -aux.r[n + 1].clone(), -r.clone()]),
        );
        let mut sum_rule = Float::with_val(bits, r);
        for j in 0..n {
            sum_rule += Float::with_val(bits, &aux.r[j] * 2u32);
        }
        rep.push("sum R_j = r_n + 2 sum r_j", n, t, balance(&[sum_r.clone(), -sum_rule]));
        rep.push(
            "beta_n = (n + r_n)/2",
            n,
            t,
            balance(&[beta.clone(), -Float::with_val(bits, &nf + r) / 2u32]),
        );
        let lhs = Float::with_val(bits, t * r) * (-2 * sgn);
        let rhs = Float::with_val(bits, beta * big_r) * big_r1;
        rep.push("-2(-1)^n t r_n = beta_n R_n R_{n-1}", n, t, balance(&[lhs, -rhs]));
        let rhs = Float::with_val(bits, beta * 2u32) * Float::with_val(bits, big_r + big_r1);
        rep.push(
            "r_n^2 + 2(1-(-1)^n)t + sum R_j = 2 beta_n (R_{n-1} + R_n)",
            n,
            t,
            balance(&[r2.clone(), par2.clone(), sum_r.clone(), -rhs]),
        );
        let nn1 = Float::with_val(bits, n * n.saturating_sub(1));
        let p4 = Float::with_val(bits, &rec.p_coeff[n] * 4u32);
        rep.push(
            "4p = r_n - sum R_j - n(n-1)",
            n,
            t,
            balance(&[p4.clone(), -r.clone(), sum_r.clone(), nn1.clone()]),
        );
        let frac = Float::with_val(bits, t * r) * (4 * sgn) / big_r;
        let prod = Float::with_val(bits, &nf + r) * big_r;
        rep.push(
            "4p rational in r_n, R_n",
            n,
            t,
            balance(&[p4, -r.clone(), -r2, -par2, -frac, prod, nn1]),
        );
    }
    for z in default_z_samples(bits) {
        let vp = v_prime(&z, t);
        for n in 1..aux.n_max {
            let c = aux.coefficients(n);
            let c_next = aux.coefficients(n + 1);
            let c_prev = aux.coefficients(n - 1);
            let (a_n, b_n, b_next) = (c.a(&z), c.b(&z), c_next.b(&z));
            rep.push(
                "S1",
                n,
                t,
                balance(&[
                    b_next.clone(),
                    b_n.clone(),
                    -Float::with_val(bits, &z * &a_n),
                    vp.clone(),
                ]),
            );
            rep.push(
                "S2",
                n,
                t,
                balance(&[
                    Float::with_val(bits, 1),
                    Float::with_val(bits, &z * &b_next),
                    -Float::with_val(bits, &z * &b_n),
                    -Float::with_val(bits, &rec.beta[n + 1] * c_next.a(&z)),
                    Float::with_val(bits, &rec.beta[n] * c_prev.a(&z)),
                ]),
            );
            let sum_a = sum_a(n, &aux.sigma[n], &z);
            rep.push(
                "S2'",
                n,
                t,
                balance(&[
                    Float::with_val(bits, b_n.square_ref()),
                    Float::with_val(bits, &vp * &b_n),
                    sum_a,
                    -Float::with_val(bits, &rec.beta[n] * &a_n) * c_prev.a(&z),
                ]),
            );
        }
    }
    Ok(rep)
}

/// `Σ_{j<n} A_j(z) = 2n - σ_n/z²`.
fn sum_a(n: usize, sigma: &Float, z: &Float) -> Float {
    let bits = z.prec();
    let z2 = Float::with_val(bits, z.square_ref());
    Float::with_val(bits, 2 * n as u64) - Float::with_val(bits, sigma / &z2)
}

/// Lowering and raising relations and the second-order equation for `P_n`
/// at the sample points, for `0 ≤ n ≤ n_max - 1`.
pub fn check_ladder_relations(
    rec: &RecurrenceData,
    aux: &AuxQuantities,
    z_samples: &[Float],
    prec: &PrecisionConfig,
) -> Result<ResidualReport> {
    check_z(z_samples)?;
    let bits = prec.work_bits;
    let t = &aux.t;
    let n_top = aux.n_max.min(rec.n_max);
    let polys = (0..=n_top)
        .map(|n| polynomial_coeffs(rec, n))
        .collect::<Result<Vec<_>>>()?;
    let mut rep = ResidualReport::new();
    for z in z_samples {
        let z = Float::with_val(bits, z);
        let vp = v_prime(&z, t);
        let vals: Vec<(Float, Float, Float)> = polys.iter().map(|p| p.eval(&z)).collect();
        for n in 0..n_top {
            let c = aux.coefficients(n);
            let (a, b) = (c.a(&z), c.b(&z));
            let (p, dp, ddp) = &vals[n];
            let lowering_rhs = if n == 0 {
                Float::new(bits)
            } else {
                Float::with_val(bits, &rec.beta[n] * &a) * &vals[n - 1].0
            };
            rep.push(
                "lowering",
                n,
                t,
                balance(&[dp.clone(), -lowering_rhs, Float::with_val(bits, &b * p)]),
            );
            if n == 0 {
                continue;
            }
            let (pm, dpm, _) = &vals[n - 1];
            let a_prev = aux.coefficients(n - 1).a(&z);
            rep.push(
                "raising",
                n,
                t,
                balance(&[
                    dpm.clone(),
                    -Float::with_val(bits, &b + &vp) * pm,
                    Float::with_val(bits, &a_prev * p),
                ]),
            );
            let ratio = Float::with_val(bits, c.da(&z) / &a);
            let first = -Float::with_val(bits, &vp + &ratio) * dp;
            let zeroth = (c.db(&z) - Float::with_val(bits, &b * &ratio) + sum_a(n, &aux.sigma[n], &z)) * p;
            rep.push("P_n ODE", n, t, balance(&[ddp.clone(), first, zeroth]));
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prec() -> PrecisionConfig {
        PrecisionConfig::new(256, 64, 0).unwrap()
    }

    fn close(a: &Float, b: &Float) -> bool {
        crate::residual::mismatch(a, b) < Float::with_val(256, 1e-60)
    }

    #[test]
    fn closed_forms_at_t() {
        let p = prec();
        let bits = p.work_bits;
        for tv in ["0.3", "1", "2.25", "7"] {
            let t = p.parse(tv).unwrap();
            let (_, aux) = compute_at(&t, 4, &p).unwrap();
            let st = Float::with_val(bits, t.sqrt_ref());
            let two_st = Float::with_val(bits, &st * 2u32);
            assert!(close(&aux.r[1], &two_st));
            assert!(close(&aux.big_r[0], &two_st));
            assert!(close(&aux.sigma[1], &Float::with_val(bits, -&two_st)));
            let r1 = Float::with_val(bits, &t * 4u32) / Float::with_val(bits, &two_st + 1u32);
            assert!(close(&aux.big_r[1], &r1));
            assert!(aux.r[0].is_zero() && aux.sigma[0].is_zero());
            // R_0' = 1/√t, R_0'' = -t^{-3/2}/2
            assert!(close(&aux.d_big_r[0], &Float::with_val(bits, st.recip_ref())));
            let d2 = -Float::with_val(bits, &st * &t).recip() / 2u32;
            assert!(close(&aux.d2_big_r[0], &d2));
        }
        let (_, aux) = compute_at(&p.real(1.0), 3, &p).unwrap();
        assert!(close(&aux.r[2], &(p.int(-2) / 3u32)));
    }

    #[test]
    fn worked_identity_values() {
        let p = prec();
        let (rec, aux) = compute_at(&p.real(1.0), 4, &p).unwrap();
        let rep = check_s_identities(&aux, &rec, &p).unwrap();
        let tol = p.tolerance();
        assert!(rep.all_within(&tol), "{:?}", rep.worst());
        let c = aux.coefficients(1);
        let z = p.real(2.0);
        // (3/2)(2 + 1/3) - (1 + 1/4)·2 = 1
        let lhs = Float::with_val(p.work_bits, &rec.beta[1] * c.a(&z)) - c.b(&z) * 2u32;
        assert!(close(&lhs, &p.int(1)));
        let rep = check_ladder_relations(&rec, &aux, &default_z_samples(p.work_bits), &p).unwrap();
        assert!(rep.all_within(&tol), "{:?}", rep.worst());
    }

    #[test]
    fn rejects_zero_sample() {
        let p = prec();
        let (rec, aux) = compute_at(&p.real(1.0), 3, &p).unwrap();
        assert!(check_ladder_relations(&rec, &aux, &[p.zero()], &p).is_err());
    }

    #[test]
    fn unperturbed_is_rejected() {
        let p = prec();
        assert!(compute_at(&p.zero(), 3, &p).is_err());
    }
}
