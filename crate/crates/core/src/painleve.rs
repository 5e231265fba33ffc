//! Differential equations in `t`: the Riccati pair, Painlevé III′ for
//! `R_n`, the equations for `r_n` and `σ_n`, a Taylor-series integrator
//! for Painlevé III′, and the integral representation of `ln D_n`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hankel::{gaussian_pivot_jets, gaussian_table, hermite_log_det, Factorization};
use crate::jet::Jet;
use crate::ladder::{compute_at, parity_sign, parity_term, AuxQuantities};
use crate::precision::PrecisionConfig;
use crate::quadrature::GaussLegendre;
use crate::residual::{balance, ResidualReport};

/// Point on a Painlevé III′ trajectory: `y = R_n(t)`, `dy = R_n'(t)`.
#[derive(Clone, Debug)]
pub struct OdeState {
    pub t: Float,
    pub y: Float,
    pub dy: Float,
    pub n: usize,
}

/// Residuals per equation on an ascending `t` grid; each entry is the
/// largest residual over the orders `n` checked at that `t`.
#[derive(Clone, Debug, Default)]
pub struct ResidualGrid {
    pub t_grid: Vec<Float>,
    pub residuals: BTreeMap<String, Vec<Float>>,
}

impl ResidualGrid {
    /// One report per grid point, in the order of `t_grid`.
    pub fn from_reports(t_grid: Vec<Float>, reports: &[ResidualReport]) -> Self {
        let mut residuals: BTreeMap<String, Vec<Float>> = BTreeMap::new();
        for rep in reports {
            for id in rep.identities() {
                residuals.entry(id).or_default();
            }
        }
        for (name, column) in residuals.iter_mut() {
            for rep in reports {
                let worst = rep
                    .max_for(name)
                    .map(|r| r.value.clone())
                    .unwrap_or_else(|| Float::new(64));
                column.push(worst);
            }
        }
        ResidualGrid { t_grid, residuals }
    }

    pub fn max(&self, equation: &str) -> Option<Float> {
        self.residuals.get(equation).and_then(|col| {
            col.iter()
                .max_by(|a, b| a.partial_cmp(b).expect("finite residuals"))
                .cloned()
        })
    }
}

fn f(bits: u32, x: impl Into<f64>) -> Float {
    Float::with_val(bits, x.into())
}

/// Riccati pair `r_n' = -2(-1)^n r_n/R_n - (n + r_n)R_n/(2t)`,
/// `2tR_n' = R_n² + (1 - 2r_n)R_n - 4(-1)^n t`, together with
/// `2tβ_n' = β_n(R_{n-1} - R_n)` and `2t p'(n) = (1-(-1)^n)t - β_nR_n`.
pub fn riccati_residuals(aux: &AuxQuantities, prec: &PrecisionConfig) -> ResidualReport {
    let bits = prec.work_bits;
    let t = &aux.t;
    let two_t = Float::with_val(bits, t * 2u32);
    let mut rep = ResidualReport::new();
    for n in 0..=aux.n_max {
        let sgn = parity_sign(n);
        let (r, dr, big_r, d_big_r) = (&aux.r[n], &aux.dr[n], &aux.big_r[n], &aux.d_big_r[n]);
        let t1 = Float::with_val(bits, r * (2 * sgn)) / big_r;
        let t2 = Float::with_val(bits, r + n as u64) * big_r / &two_t;
        rep.push("r Riccati", n, t, balance(&[dr.clone(), t1, t2]));
        let lhs = Float::with_val(bits, &two_t * d_big_r);
        let one_m_2r = Float::with_val(bits, 1u32) - Float::with_val(bits, r * 2u32);
        rep.push(
            "R Riccati",
            n,
            t,
            balance(&[
                lhs,
                -Float::with_val(bits, big_r.square_ref()),
                -Float::with_val(bits, &one_m_2r * big_r),
                Float::with_val(bits, t * (4 * sgn)),
            ]),
        );
        if n == 0 {
            continue;
        }
        let beta = &aux.beta[n];
        let lhs = Float::with_val(bits, &two_t * &aux.dbeta[n]);
        let rhs = Float::with_val(bits, beta * &aux.big_r[n - 1]);
        let rhs2 = Float::with_val(bits, beta * big_r);
        rep.push("beta derivative", n, t, balance(&[lhs, -rhs, rhs2]));
        let lhs = Float::with_val(bits, &two_t * &aux.dp[n]);
        rep.push(
            "p derivative",
            n,
            t,
            balance(&[lhs, -parity_term(n, t), Float::with_val(bits, beta * big_r)]),
        );
    }
    rep
}

/// Painlevé III′ for `R_n` and the second-order equation for `r_n`.
pub fn p3_residual(aux: &AuxQuantities, prec: &PrecisionConfig) -> ResidualReport {
    let bits = prec.work_bits;
    let t = &aux.t;
    let t2 = Float::with_val(bits, t.square_ref());
    let mut rep = ResidualReport::new();
    for n in 0..=aux.n_max {
        let sgn = parity_sign(n);
        let (y, dy, d2y) = (&aux.big_r[n], &aux.d_big_r[n], &aux.d2_big_r[n]);
        let y2 = Float::with_val(bits, y.square_ref());
        let terms = [
            d2y.clone(),
            -Float::with_val(bits, dy.square_ref()) / y,
            Float::with_val(bits, dy / t),
            -Float::with_val(bits, &y2 * (2 * n as u64 + 1)) / Float::with_val(bits, &t2 * 4u32),
            Float::with_val(bits, sgn) / t,
            -Float::with_val(bits, &y2 * y) / Float::with_val(bits, &t2 * 4u32),
            f(bits, 4) / y,
        ];
        rep.push("Painleve III", n, t, balance(&terms));
        let (lhs, rhs) = r_equation_sides(n, t, &aux.r[n], &aux.dr[n], &aux.d2r[n]);
        rep.push("r second order", n, t, balance(&[lhs, -rhs]));
    }
    rep
}

/// Both sides of the second-order equation for `r_n`, `[X]² = t[Y][Z]²`.
fn r_equation_sides(n: usize, t: &Float, r: &Float, dr: &Float, d2r: &Float) -> (Float, Float) {
    let bits = r.prec();
    let s = parity_sign(n);
    let nn = n as i64;
    let dr2 = Float::with_val(bits, dr.square_ref());
    let r2 = Float::with_val(bits, r.square_ref());
    let tr = Float::with_val(bits, t * r);
    let mut x = Float::with_val(bits, Float::with_val(bits, t.square_ref()) * dr) * d2r * 2u32;
    x += Float::with_val(bits, &tr * &dr2) * 2u32;
    x -= Float::with_val(bits, &tr * dr) * (8 * s);
    x += Float::with_val(bits, t * &dr2);
    x -= Float::with_val(bits, t * dr) * (4 * s * nn);
    x -= Float::with_val(bits, &r2 * r) * (8 * s);
    x -= Float::with_val(bits, &r2 * (8 * s * nn));
    let mut y = Float::with_val(bits, t * &dr2);
    y -= Float::with_val(bits, &r2 * (4 * s));
    y -= Float::with_val(bits, r * (4 * s * nn));
    let mut z = Float::with_val(bits, t * d2r) * 2u32;
    z += Float::with_val(bits, r * dr) * 2u32;
    z += dr;
    z -= Float::with_val(bits, r * (8 * s));
    z -= 4 * s * nn;
    let lhs = Float::with_val(bits, x.square_ref());
    let rhs = Float::with_val(bits, t * &y) * Float::with_val(bits, z.square_ref());
    (lhs, rhs)
}

/// The `σ_n` equation, the relation `r_n² = σ_n - 2tσ_n' + 2(1-(-1)^n)t`
/// and the product relation, for `1 ≤ n ≤ n_max`.
pub fn sigma_ode_residual(aux: &AuxQuantities, prec: &PrecisionConfig) -> ResidualReport {
    let bits = prec.work_bits;
    let t = &aux.t;
    let mut rep = ResidualReport::new();
    for n in 1..=aux.n_max {
        let s = parity_sign(n);
        let (sig, ds, d2s) = (&aux.sigma[n], &aux.dsigma[n], &aux.d2sigma[n]);
        let par2 = Float::with_val(bits, parity_term(n, t) * 2u32);
        let t_ds = Float::with_val(bits, t * ds);
        // 4σ - 4(1+(-1)^n)tσ' + (-1)^n tσ'²
        let mut a = Float::with_val(bits, sig * 4u32);
        a -= Float::with_val(bits, &t_ds * (4 * (1 + s)));
        a += Float::with_val(bits, &t_ds * ds) * s;
        // 4σ - 8tσ' + 8(1-(-1)^n)t
        let mut b = Float::with_val(bits, sig * 4u32);
        b -= Float::with_val(bits, &t_ds * 8u32);
        b += Float::with_val(bits, &par2 * 4u32);
        // 2(1-(-1)^n) - σ' - 2tσ''
        let mut c = Float::with_val(bits, 2 * (1 - s));
        c -= ds;
        c -= Float::with_val(bits, t * d2s) * 2u32;
        let inner = Float::with_val(bits, &a * &b) - Float::with_val(bits, t * Float::with_val(bits, c.square_ref())) * s;
        let lhs = Float::with_val(bits, inner.square_ref());
        let base = Float::with_val(bits, sig - Float::with_val(bits, &t_ds * 2u32)) + &par2;
        let rhs = Float::with_val(bits, base.square_ref()) * &base * (256 * n as u64 * n as u64);
        rep.push("sigma second order", n, t, balance(&[lhs, -rhs]));

        let r = &aux.r[n];
        let r2 = Float::with_val(bits, r.square_ref());
        rep.push("r^2 from sigma", n, t, balance(&[r2.clone(), -base.clone()]));

        let lhs = Float::with_val(bits, t * r) * Float::with_val(bits, r + n as u64) * (-16 * s);
        let w = Float::with_val(bits, &r2 + &par2) - sig;
        let tdr = Float::with_val(bits, t * &aux.dr[n]);
        let rhs1 = Float::with_val(bits, w.square_ref());
        let rhs2 = Float::with_val(bits, tdr.square_ref()) * 4u32;
        rep.push("product relation", n, t, balance(&[lhs, -rhs1, rhs2]));
    }
    rep
}

/// All of the above at each grid point, concurrently, with orders
/// `0..=n_max`.
pub fn ode_residual_grid(
    n_max: usize,
    t_grid: &[Float],
    prec: &PrecisionConfig,
) -> Result<(ResidualGrid, ResidualReport)> {
    let reports = t_grid
        .par_iter()
        .map(|t| {
            let (_, aux) = compute_at(t, n_max, prec)?;
            let mut rep = riccati_residuals(&aux, prec);
            rep.extend(p3_residual(&aux, prec));
            rep.extend(sigma_ode_residual(&aux, prec));
            Ok(rep)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut all = ResidualReport::new();
    for rep in &reports {
        all.extend(rep.clone());
    }
    all.sort();
    Ok((ResidualGrid::from_reports(t_grid.to_vec(), &reports), all))
}

/// Right-hand side of Painlevé III′ as a jet.
fn p3_rhs(n: usize, tau: &Jet, y: &Jet, dy: &Jet) -> Jet {
    let bits = y.prec();
    let inv_y = y.recip();
    let inv_t = tau.recip();
    let quarter_inv_t2 = inv_t.square().scale(&f(bits, 0.25));
    let y2 = y.square();
    let mut out = dy.square().mul(&inv_y);
    out = out.sub(&dy.mul(&inv_t));
    out = out.add(&y2.mul(&quarter_inv_t2).scale_i(2 * n as i64 + 1));
    out = out.sub(&inv_t.scale_i(parity_sign(n)));
    out = out.add(&y2.mul(y).mul(&quarter_inv_t2));
    out.sub(&inv_y.scale_i(4))
}

/// Taylor coefficients `y_0..=y_order` of the solution through `state`.
fn taylor_coefficients(state: &OdeState, order: usize) -> Vec<Float> {
    let bits = state.y.prec();
    let mut c = vec![state.y.clone(), state.dy.clone()];
    for k in 0..order.saturating_sub(1) {
        let y = Jet::from_coeffs(c.clone());
        let dy = y.differentiate();
        let y = y.truncate(k);
        let tau = Jet::variable(&state.t, k);
        let rhs = p3_rhs(state.n, &tau, &y, &dy);
        let next = Float::with_val(bits, rhs.coeff(k)) / ((k as u64 + 1) * (k as u64 + 2));
        c.push(next);
    }
    c
}

fn taylor_step(state: &OdeState, h: &Float, order: usize) -> OdeState {
    let bits = state.y.prec();
    let c = taylor_coefficients(state, order);
    let y = Jet::from_coeffs(c);
    let dy = y.differentiate();
    OdeState {
        t: Float::with_val(bits, &state.t + h),
        y: y.eval_at(h),
        dy: dy.eval_at(h),
        n: state.n,
    }
}

/// Step-size control for [`integrate_p3`].
#[derive(Clone, Debug)]
pub struct StepControl {
    /// Local error tolerance per step, relative to `max(1, |y|, |y'|)`.
    pub tol: Float,
    /// Taylor order.
    pub order: usize,
    pub max_steps: usize,
    /// Steps shorter than this abort the integration.
    pub h_min: Float,
}

impl StepControl {
    pub fn new(tol: Float) -> Self {
        let bits = tol.prec();
        // enough terms that the truncation error is not the limiting factor
        let digits = (-crate::precision::log2_abs(&tol) * std::f64::consts::LOG10_2).max(8.0);
        let order = (digits * 0.8).ceil() as usize + 8;
        StepControl {
            h_min: Float::with_val(bits, 1e-30),
            tol,
            order,
            max_steps: 100_000,
        }
    }

    fn halved(&self) -> Self {
        StepControl {
            tol: Float::with_val(self.tol.prec(), &self.tol / 2u32),
            ..self.clone()
        }
    }
}

/// Run record of an integration, serialized as the integration log.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct IntegrationLog {
    pub n: usize,
    pub t0: String,
    pub t1: String,
    pub steps: usize,
    pub rejected_steps: usize,
    pub final_error_estimate: f64,
}

#[derive(Clone, Debug)]
pub struct Integration {
    pub state: OdeState,
    pub log: IntegrationLog,
}

fn state_error(a: &OdeState, b: &OdeState) -> Float {
    let bits = a.y.prec();
    let scale = [&b.y, &b.dy]
        .iter()
        .map(|x| Float::with_val(bits, x.abs_ref()))
        .fold(Float::with_val(bits, 1), |m, x| if x > m { x } else { m });
    let ey = Float::with_val(bits, &a.y - &b.y).abs();
    let ed = Float::with_val(bits, &a.dy - &b.dy).abs();
    let e = if ey > ed { ey } else { ed };
    e / scale
}

fn singular(reason: impl Into<String>, state: &OdeState) -> Error {
    Error::Singularity {
        reason: reason.into(),
        state: Box::new(state.clone()),
    }
}

/// One adaptive pass; returns the endpoint, accepted and rejected steps and
/// the accumulated local error estimate.
fn integrate_once(
    init: &OdeState,
    t_end: &Float,
    ctl: &StepControl,
) -> Result<(OdeState, usize, usize, Float)> {
    let bits = init.y.prec();
    let mut state = init.clone();
    let span = Float::with_val(bits, t_end - &init.t);
    if span.is_zero() {
        return Ok((state, 0, 0, Float::new(bits)));
    }
    let forward = span > 0;
    // the radius of convergence is at most the distance to t = 0
    let mut h = Float::with_val(bits, &init.t / 4u32);
    if span.clone().abs() < h {
        h = span.clone().abs();
    }
    if !forward {
        h = -h;
    }
    let (mut steps, mut rejected) = (0usize, 0usize);
    let mut err_sum = Float::new(bits);
    let inv_order = 1.0 / (ctl.order as f64 + 1.0);
    while state.t != *t_end {
        if steps + rejected >= ctl.max_steps {
            return Err(singular("step budget exhausted", &state));
        }
        let remaining = Float::with_val(bits, t_end - &state.t);
        if (forward && h > remaining) || (!forward && h < remaining) {
            h = remaining;
        }
        let half_h = Float::with_val(bits, &h / 2u32);
        let full = taylor_step(&state, &h, ctl.order);
        let mid = taylor_step(&state, &half_h, ctl.order);
        let fine = taylor_step(&mid, &half_h, ctl.order);
        let err = state_error(&full, &fine);
        let ratio = if err.is_zero() {
            4.0
        } else {
            let q = Float::with_val(bits, &ctl.tol / &err).to_f64();
            (0.9 * q.powf(inv_order)).clamp(0.2, 4.0)
        };
        let ok = err <= ctl.tol && fine.y > 0 && mid.y > 0;
        if ok {
            let landing = Float::with_val(bits, &state.t + &h);
            state = fine;
            // land exactly on t_end
            if landing == *t_end {
                state.t = t_end.clone();
            }
            err_sum += &err;
            steps += 1;
        } else {
            rejected += 1;
        }
        h *= if ok { ratio } else { ratio.min(0.5) };
        if Float::with_val(bits, h.abs_ref()) < ctl.h_min && state.t != *t_end {
            let why = if state.y <= 0 { "R_n reached zero" } else { "step size underflow" };
            return Err(singular(why, &state));
        }
    }
    Ok((state, steps, rejected, err_sum))
}

/// Integrates Painlevé III′ for `R_n` from `t_start` to `t_end` with an
/// adaptive Taylor method, then repeats the run at half the tolerance. The
/// logged error estimate is the larger of the accumulated local error and
/// the difference between the two runs.
pub fn integrate_p3(
    n: usize,
    t_start: &Float,
    t_end: &Float,
    init: &OdeState,
    prec: &PrecisionConfig,
    ctl: &StepControl,
) -> Result<Integration> {
    let bits = prec.work_bits;
    if init.n != n || init.t != *t_start {
        return Err(Error::domain("initial state does not match (n, t_start)"));
    }
    if *t_start <= 0 || *t_end <= 0 {
        return Err(Error::domain("integration endpoints must be positive"));
    }
    if init.y <= 0 {
        return Err(singular("initial R_n is not positive", init));
    }
    let init = OdeState {
        t: Float::with_val(bits, &init.t),
        y: Float::with_val(bits, &init.y),
        dy: Float::with_val(bits, &init.dy),
        n,
    };
    let t_end = Float::with_val(bits, t_end);
    let (coarse, steps, rejected, err_sum) = integrate_once(&init, &t_end, ctl)?;
    let (fine, _, _, _) = integrate_once(&init, &t_end, &ctl.halved())?;
    let diff = state_error(&coarse, &fine);
    let estimate = if diff > err_sum { diff } else { err_sum };
    Ok(Integration {
        log: IntegrationLog {
            n,
            t0: prec.format(&init.t),
            t1: prec.format(&t_end),
            steps,
            rejected_steps: rejected,
            final_error_estimate: estimate.to_f64(),
        },
        state: fine,
    })
}

/// Initial state for [`integrate_p3`] from the moment factorization.
pub fn initial_state(n: usize, t: &Float, prec: &PrecisionConfig) -> Result<OdeState> {
    let (y, dy) = big_r_with_derivative(n, t, prec)?;
    Ok(OdeState {
        t: Float::with_val(prec.work_bits, t),
        y,
        dy,
        n,
    })
}

/// `(R_n(t), R_n'(t))` from second-order pivot jets.
pub fn big_r_with_derivative(n: usize, t: &Float, prec: &PrecisionConfig) -> Result<(Float, Float)> {
    let table = gaussian_table(t, n, 2, prec)?;
    let pivots = gaussian_pivot_jets(&table, n, 2, Factorization::ParitySplit)?;
    let l = pivots[n].ln();
    let t = Float::with_val(prec.work_bits, t);
    let d1 = l.deriv(1);
    let d2 = l.deriv(2);
    let y = Float::with_val(prec.work_bits, &t * &d1) * -2i32;
    let dy = -(Float::with_val(prec.work_bits, &t * &d2) + &d1) * 2u32;
    Ok((y, dy))
}

/// Integrand of the representation in `s`:
/// `[1/4 + 2s - nR - R²/4 - sR'/R + s²(R'² - 4)/R²] / (2s)`.
pub fn representation_integrand(n: usize, s: &Float, prec: &PrecisionConfig) -> Result<Float> {
    let bits = prec.work_bits;
    let (y, dy) = big_r_with_derivative(n, s, prec)?;
    Ok(integrand_from(n, s, &y, &dy, bits))
}

fn integrand_from(n: usize, s: &Float, y: &Float, dy: &Float, bits: u32) -> Float {
    let s2 = Float::with_val(bits, s.square_ref());
    let y2 = Float::with_val(bits, y.square_ref());
    let dy2 = Float::with_val(bits, dy.square_ref());
    let terms = [
        f(bits, 0.25),
        Float::with_val(bits, s * 2u32),
        -Float::with_val(bits, y * n as u64),
        -Float::with_val(bits, &y2 / 4u32),
        -Float::with_val(bits, s * dy) / y,
        Float::with_val(bits, &s2 * (dy2 - 4u32)) / &y2,
    ];
    let mut sum = Float::new(bits);
    for x in terms {
        sum += x;
    }
    sum / Float::with_val(bits, s * 2u32)
}

/// Node-doubling schedule for [`integral_representation`].
#[derive(Clone, Debug)]
pub struct QuadratureParams {
    pub initial_nodes: usize,
    pub max_nodes: usize,
    pub tol: Float,
}

#[derive(Clone, Debug)]
pub struct QuadratureResult {
    pub value: Float,
    pub error_estimate: Float,
    pub nodes: usize,
}

/// `∫₀ᵗ integrand ds` after `s = u²`, by Gauss–Legendre in `u` with the
/// node count doubled until two successive rules agree to `quad.tol`. The
/// value approximates `ln D_n(t) - ln D_n(0)`.
pub fn integral_representation(
    n: usize,
    t: &Float,
    prec: &PrecisionConfig,
    quad: &QuadratureParams,
) -> Result<QuadratureResult> {
    if *t <= 0 {
        return Err(Error::domain("the integral representation needs t > 0"));
    }
    let bits = prec.work_bits;
    let zero = Float::new(bits);
    let upper = Float::with_val(bits, t.sqrt_ref());
    let rule = |nodes: usize| -> Result<Float> {
        let gl = GaussLegendre::new(nodes, bits)?;
        let pts = gl.on_interval(&zero, &upper);
        let vals = pts
            .par_iter()
            .map(|(u, w)| {
                let s = Float::with_val(bits, u.square_ref());
                // ds/(2s) = du/u, so the u-integrand is 2u · integrand(s)
                let g = representation_integrand(n, &s, prec)?;
                Ok(Float::with_val(bits, &g * u) * 2u32 * w)
            })
            .collect::<Result<Vec<Float>>>()?;
        Ok(vals.into_iter().fold(Float::new(bits), |acc, x| acc + x))
    };
    let mut nodes = quad.initial_nodes.max(2);
    let mut prev = rule(nodes)?;
    let mut last_err = f64::INFINITY;
    while nodes * 2 <= quad.max_nodes {
        nodes *= 2;
        let cur = rule(nodes)?;
        let err = Float::with_val(bits, &cur - &prev).abs();
        if err <= quad.tol {
            return Ok(QuadratureResult {
                value: cur,
                error_estimate: err,
                nodes,
            });
        }
        last_err = err.to_f64();
        prev = cur;
    }
    Err(Error::QuadratureNonConvergence { estimate: last_err })
}

/// `ln D_n(t) - ln D_n(0)` from the factorization, the reference for
/// [`integral_representation`].
pub fn log_det_ratio(n: usize, t: &Float, prec: &PrecisionConfig) -> Result<Float> {
    if n == 0 {
        return Ok(Float::new(prec.work_bits));
    }
    let table = gaussian_table(t, n - 1, 0, prec)?;
    let ln_d = crate::hankel::hankel_determinant(&table, n, prec)?;
    Ok(ln_d - hermite_log_det(n, prec.work_bits))
}

/// `σ(s) = σ_n(s/n²)` with derivatives in `s`.
#[derive(Clone, Debug)]
pub struct ScaledSigmaSample {
    pub n: usize,
    pub s: Float,
    pub sigma: Float,
    pub dsigma: Float,
    pub d2sigma: Float,
}

/// Samples of `σ_n(s/n²)`, derivatives mapped through `d/ds = n⁻² d/dt`.
pub fn scaled_sigma_samples(
    n: usize,
    s_values: &[Float],
    prec: &PrecisionConfig,
) -> Result<Vec<ScaledSigmaSample>> {
    let bits = prec.work_bits;
    let n2 = Float::with_val(bits, n as u64 * n as u64);
    let n4 = Float::with_val(bits, n2.square_ref());
    s_values
        .par_iter()
        .map(|s| {
            let t = Float::with_val(bits, s / &n2);
            let (_, aux) = compute_at(&t, n, prec)?;
            Ok(ScaledSigmaSample {
                n,
                s: Float::with_val(bits, s),
                sigma: aux.sigma[n].clone(),
                dsigma: Float::with_val(bits, &aux.dsigma[n] / &n2),
                d2sigma: Float::with_val(bits, &aux.d2sigma[n] / &n4),
            })
        })
        .collect()
}

/// Residual of `4s²σ''² + 4sσ'σ'' + 8sσ'³ - 4σσ'² + σ'² = 0` per sample.
pub fn scaled_sigma_form_residual(
    samples: &[ScaledSigmaSample],
    prec: &PrecisionConfig,
) -> Vec<Float> {
    let bits = prec.work_bits;
    samples
        .iter()
        .map(|x| {
            let (s, sg, d1, d2) = (&x.s, &x.sigma, &x.dsigma, &x.d2sigma);
            let d1sq = Float::with_val(bits, d1.square_ref());
            let terms = [
                Float::with_val(bits, s.square_ref()) * Float::with_val(bits, d2.square_ref()) * 4u32,
                Float::with_val(bits, s * d1) * d2 * 4u32,
                Float::with_val(bits, s * &d1sq) * d1 * 8u32,
                -Float::with_val(bits, sg * &d1sq) * 4u32,
                d1sq,
            ];
            balance(&terms)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prec() -> PrecisionConfig {
        PrecisionConfig::new(256, 64, 0).unwrap()
    }

    #[test]
    fn closed_form_residuals_vanish() {
        let p = prec();
        let tol = p.tolerance();
        for tv in [0.5, 1.0, 4.0] {
            let (_, aux) = compute_at(&p.real(tv), 6, &p).unwrap();
            for rep in [
                riccati_residuals(&aux, &p),
                p3_residual(&aux, &p),
                sigma_ode_residual(&aux, &p),
            ] {
                assert!(rep.all_within(&tol), "{:?}", rep.worst());
            }
        }
    }

    #[test]
    fn exact_n0_trajectory() {
        let p = prec();
        let init = OdeState {
            t: p.real(1.0),
            y: p.real(2.0),
            dy: p.real(1.0),
            n: 0,
        };
        let ctl = StepControl::new(Float::with_val(256, 1e-30));
        let out = integrate_p3(0, &p.real(1.0), &p.real(4.0), &init, &p, &ctl).unwrap();
        assert_eq!(out.state.t, 4);
        assert!((out.state.y.to_f64() - 4.0).abs() < 1e-25);
        assert!((out.state.dy.to_f64() - 0.5).abs() < 1e-25);
        assert!(out.log.steps > 0);
    }

    #[test]
    fn zero_length_integration_is_identity() {
        let p = prec();
        let init = initial_state(1, &p.real(1.0), &p).unwrap();
        let ctl = StepControl::new(Float::with_val(256, 1e-30));
        let out = integrate_p3(1, &p.real(1.0), &p.real(1.0), &init, &p, &ctl).unwrap();
        assert_eq!(out.state.y, init.y);
        assert_eq!(out.state.dy, init.dy);
        assert_eq!(out.log.steps, 0);
    }

    #[test]
    fn n0_integrand_vanishes() {
        let p = prec();
        for sv in [0.01, 0.3, 2.0] {
            let g = representation_integrand(0, &p.real(sv), &p).unwrap();
            assert!(g.clone().abs() < Float::with_val(256, 1e-60), "{}", g.to_f64());
        }
    }

    #[test]
    fn zero_function_solves_scaled_form() {
        let p = prec();
        let sample = ScaledSigmaSample {
            n: 1,
            s: p.real(1.0),
            sigma: p.zero(),
            dsigma: p.zero(),
            d2sigma: p.zero(),
        };
        assert!(scaled_sigma_form_residual(&[sample], &p)[0].is_zero());
    }
}
