//! Norms, recurrence coefficients and log-determinants from the moment
//! matrix.
//!
//! The Gaussian Hankel matrix is permutation-similar to the direct sum of
//! two Hankel matrices in `y = x²`: even orders see the moments `μ_{2l}`
//! (weight `y^{-1/2} e^{-y-t/y}`), odd orders see `μ_{2l+2}` (weight
//! `y^{1/2} e^{-y-t/y}`). Each block is factored by the Hankel-structured
//! LDLᵀ recurrence (the Chebyshev moment algorithm), whose pivots are the
//! squared norms `h_n`. All arithmetic runs on [`Jet`]s so the pivots carry
//! their exact `t`-derivatives.

use rug::float::Constant;
use rug::Float;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::moments::{build_moment_table, MomentTable, WeightFamily, WeightSpec};
use crate::precision::PrecisionConfig;

/// How the Gaussian moment matrix is factored.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Factorization {
    /// Two half-size Hankel blocks (default).
    ParitySplit,
    /// Dense LDLᵀ of the full matrix, zero entries included.
    Unsplit,
}

/// Per-`t` bundle of norms, recurrence coefficients and log-determinants.
#[derive(Clone, Debug)]
pub struct RecurrenceData {
    pub t: Float,
    pub n_max: usize,
    /// `h_0..=h_{n_max}`.
    pub h: Vec<Float>,
    /// `β_0..=β_{n_max}` with `β_0 = 0`.
    pub beta: Vec<Float>,
    /// `p(0,t)..=p(n_max+1,t)`, with `p(0) = p(1) = 0`.
    pub p_coeff: Vec<Float>,
    /// `ln D_0..=ln D_{n_max+1}` with `D_0 = 1`.
    pub log_d: Vec<Float>,
}

/// Monic `P_n`, coefficients in increasing degree.
#[derive(Clone, Debug)]
pub struct PolynomialCoeffs {
    pub n: usize,
    pub coeffs: Vec<Float>,
}

impl PolynomialCoeffs {
    /// `(P(z), P'(z), P''(z))` by Horner's scheme.
    pub fn eval(&self, z: &Float) -> (Float, Float, Float) {
        let prec = z.prec();
        let mut p = Float::new(prec);
        let mut dp = Float::new(prec);
        let mut ddp = Float::new(prec);
        for c in self.coeffs.iter().rev() {
            ddp *= z;
            ddp += Float::with_val(prec, &dp * 2u32);
            dp *= z;
            dp += &p;
            p *= z;
            p += c;
        }
        (p, dp, ddp)
    }
}

/// Hankel-structured LDLᵀ of `[m_{i+j}]_{i,j<count}`. Returns the pivots,
/// i.e. the squared norms of the monic orthogonal polynomials, or the index
/// of the first non-positive pivot.
pub fn hankel_pivots(moments: &[Jet], count: usize) -> std::result::Result<Vec<Jet>, usize> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let width = 2 * count - 1;
    assert!(moments.len() >= width, "need {width} moments for {count} pivots");
    let order = moments[0].order();
    let prec = moments[0].prec();
    let zero = Jet::zero(order, prec);

    // Row k holds σ_{k,l} = ∫ π_k y^l dμ for l = k..=2count-2-k.
    let mut prev2: Vec<Jet> = vec![zero.clone(); width];
    let mut prev: Vec<Jet> = moments[..width].to_vec();
    let mut pivots = Vec::with_capacity(count);
    if *prev[0].value() <= 0 {
        return Err(0);
    }
    pivots.push(prev[0].clone());
    if count == 1 {
        return Ok(pivots);
    }
    let mut a_prev = prev[1].div(&prev[0]);
    let mut b_prev = prev[0].clone();
    let mut first = true;
    for k in 1..count {
        let mut cur = vec![zero.clone(); width];
        let hi = width - 1 - k;
        for l in k..=hi {
            let mut v = prev[l + 1].sub_mul(&a_prev, &prev[l]);
            if !first {
                v = v.sub_mul(&b_prev, &prev2[l]);
            }
            cur[l] = v;
        }
        if *cur[k].value() <= 0 {
            return Err(k);
        }
        pivots.push(cur[k].clone());
        if k + 1 < count {
            let a = cur[k + 1].div(&cur[k]).sub(&prev[k].div(&prev[k - 1]));
            let b = cur[k].div(&prev[k - 1]);
            a_prev = a;
            b_prev = b;
        }
        prev2 = std::mem::replace(&mut prev, cur);
        first = false;
    }
    Ok(pivots)
}

/// Dense LDLᵀ pivots of a symmetric matrix, or the index of the first
/// non-positive pivot.
pub fn dense_ldl_pivots(a: &[Vec<Jet>]) -> std::result::Result<Vec<Jet>, usize> {
    let n = a.len();
    // l[i] holds L_ik for k < i, filled column by column
    let mut l: Vec<Vec<Jet>> = vec![Vec::with_capacity(n); n];
    let mut d: Vec<Jet> = Vec::with_capacity(n);
    for j in 0..n {
        let w: Vec<Jet> = (0..j).map(|k| l[j][k].mul(&d[k])).collect();
        let mut dj = a[j][j].clone();
        for k in 0..j {
            dj = dj.sub_mul(&l[j][k], &w[k]);
        }
        if *dj.value() <= 0 {
            return Err(j);
        }
        for i in (j + 1)..n {
            let mut v = a[i][j].clone();
            for k in 0..j {
                v = v.sub_mul(&l[i][k], &w[k]);
            }
            l[i].push(v.div(&dj));
        }
        d.push(dj);
    }
    Ok(d)
}

/// Smallest table index needed for `order`-th derivative jets of the
/// Gaussian pivots.
pub fn gaussian_k_min(order: usize) -> i64 {
    -2 * order as i64
}

/// Builds a Gaussian moment table wide enough for pivots `0..=n_max` with
/// jets of the given order.
pub fn gaussian_table(
    t: &Float,
    n_max: usize,
    order: usize,
    prec: &PrecisionConfig,
) -> Result<MomentTable> {
    let spec = WeightSpec::gaussian(Float::with_val(prec.work_bits, t))?;
    let k_min = if spec.is_unperturbed() { 0 } else { gaussian_k_min(order) };
    build_moment_table(&spec, k_min, 2 * n_max as i64 + 2, prec)
}

/// Jets of `h_0..=h_{n_max}` for the Gaussian family.
pub fn gaussian_pivot_jets(
    table: &MomentTable,
    n_max: usize,
    order: usize,
    mode: Factorization,
) -> Result<Vec<Jet>> {
    if table.spec.family != WeightFamily::GaussianSingular {
        return Err(Error::domain("expected a Gaussian moment table"));
    }
    if order > 0 && table.spec.is_unperturbed() {
        return Err(Error::domain("t-derivatives need t > 0"));
    }
    table.require(gaussian_k_min(order), 2 * n_max as i64)?;
    let work_bits = table.prec();
    let fail = |index: usize| Error::PrecisionFailure { index, work_bits };
    match mode {
        Factorization::ParitySplit => {
            let n_even = n_max / 2 + 1;
            let n_odd = n_max.div_ceil(2);
            let even_m: Vec<Jet> = (0..(2 * n_even - 1) as i64)
                .map(|l| table.jet(2 * l, order))
                .collect();
            let odd_m: Vec<Jet> = (0..(2 * n_odd).saturating_sub(1) as i64)
                .map(|l| table.jet(2 * l + 2, order))
                .collect();
            let even = hankel_pivots(&even_m, n_even).map_err(|k| fail(2 * k))?;
            let odd = hankel_pivots(&odd_m, n_odd).map_err(|k| fail(2 * k + 1))?;
            let mut out = Vec::with_capacity(n_max + 1);
            for n in 0..=n_max {
                out.push(if n % 2 == 0 {
                    even[n / 2].clone()
                } else {
                    odd[n / 2].clone()
                });
            }
            Ok(out)
        }
        Factorization::Unsplit => {
            let size = n_max + 1;
            let a: Vec<Vec<Jet>> = (0..size)
                .map(|i| {
                    (0..size)
                        .map(|j| table.jet((i + j) as i64, order))
                        .collect()
                })
                .collect();
            dense_ldl_pivots(&a).map_err(fail)
        }
    }
}

/// Jets of `h̃_0..=h̃_{n_max}` for the Laguerre family, from its own moments.
pub fn laguerre_pivot_jets(table: &MomentTable, n_max: usize, order: usize) -> Result<Vec<Jet>> {
    if table.spec.family != WeightFamily::LaguerreSingular {
        return Err(Error::domain("expected a Laguerre moment table"));
    }
    if order > 0 && table.spec.is_unperturbed() {
        return Err(Error::domain("t-derivatives need t > 0"));
    }
    table.require(-(order as i64), 2 * n_max as i64)?;
    let m: Vec<Jet> = (0..=2 * n_max as i64).map(|l| table.jet(l, order)).collect();
    let work_bits = table.prec();
    hankel_pivots(&m, n_max + 1).map_err(|index| Error::PrecisionFailure { index, work_bits })
}

pub fn compute_recurrence(
    table: &MomentTable,
    n_max: usize,
    prec: &PrecisionConfig,
) -> Result<RecurrenceData> {
    let pivots = gaussian_pivot_jets(table, n_max, 0, Factorization::ParitySplit)?;
    let h: Vec<Float> = pivots.into_iter().map(|j| j.value().clone()).collect();
    Ok(recurrence_from_norms(table.t(), h, prec))
}

pub(crate) fn recurrence_from_norms(t: &Float, h: Vec<Float>, prec: &PrecisionConfig) -> RecurrenceData {
    let bits = prec.work_bits;
    let n_max = h.len() - 1;
    let mut beta = Vec::with_capacity(n_max + 1);
    beta.push(Float::new(bits));
    for n in 1..=n_max {
        beta.push(Float::with_val(bits, &h[n] / &h[n - 1]));
    }
    let mut p_coeff = vec![Float::new(bits), Float::new(bits)];
    for n in 1..=n_max {
        let next = Float::with_val(bits, &p_coeff[n] - &beta[n]);
        p_coeff.push(next);
    }
    let mut log_d = Vec::with_capacity(n_max + 2);
    log_d.push(Float::new(bits));
    for hj in &h {
        let mut next = log_d.last().unwrap().clone();
        next += Float::with_val(bits, hj.ln_ref());
        log_d.push(next);
    }
    RecurrenceData {
        t: Float::with_val(bits, t),
        n_max,
        h,
        beta,
        p_coeff,
        log_d,
    }
}

/// `ln D_n(t)`.
pub fn hankel_determinant(table: &MomentTable, n: usize, prec: &PrecisionConfig) -> Result<Float> {
    if n == 0 {
        return Err(Error::domain("Hankel order must be at least 1"));
    }
    let rec = compute_recurrence(table, n - 1, prec)?;
    Ok(rec.log_d[n].clone())
}

/// `ln D_n(0) = Σ_{j<n} ln(√π j!/2^j)`, the unperturbed Hermite product.
pub fn hermite_log_det(n: usize, bits: u32) -> Float {
    let ln_sqrt_pi = Float::with_val(bits, Constant::Pi).sqrt().ln();
    let ln2 = Float::with_val(bits, Constant::Log2);
    let mut acc = Float::new(bits);
    let mut ln_fact = Float::new(bits);
    for j in 0..n {
        if j > 0 {
            ln_fact += Float::with_val(bits, j as u32).ln();
        }
        acc += &ln_sqrt_pi;
        acc += &ln_fact;
        acc -= Float::with_val(bits, &ln2 * j as u32);
    }
    acc
}

/// Monic `P_n` from the three-term recurrence `P_{k+1} = x P_k - β_k P_{k-1}`.
pub fn polynomial_coeffs(rec: &RecurrenceData, n: usize) -> Result<PolynomialCoeffs> {
    if n > rec.n_max + 1 {
        return Err(Error::domain(format!(
            "degree {n} exceeds the recurrence range {}",
            rec.n_max + 1
        )));
    }
    let bits = rec.t.prec();
    let mut prev: Vec<Float> = Vec::new();
    let mut cur = vec![Float::with_val(bits, 1)];
    for k in 0..n {
        let mut next = vec![Float::new(bits); k + 2];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] += c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= Float::with_val(bits, c * &rec.beta[k]);
        }
        prev = cur;
        cur = next;
    }
    Ok(PolynomialCoeffs { n, coeffs: cur })
}

/// `d/dt ln D_n` (order 1) or `d²/dt² ln D_n` (order 2) from the trace
/// identities `tr(M⁻¹M')` and `tr(M⁻¹M'') - tr((M⁻¹M')²)`, evaluated
/// blockwise on the parity-split moment matrix.
pub fn logdet_t_derivative(
    table: &MomentTable,
    n: usize,
    order: u32,
    prec: &PrecisionConfig,
) -> Result<Float> {
    if !(1..=2).contains(&order) {
        return Err(Error::domain("log-determinant derivative order must be 1 or 2"));
    }
    if n == 0 {
        return Err(Error::domain("Hankel order must be at least 1"));
    }
    if table.spec.family != WeightFamily::GaussianSingular || table.spec.is_unperturbed() {
        return Err(Error::domain("trace derivatives need a Gaussian table with t > 0"));
    }
    table.require(-4, 2 * n as i64 - 2)?;
    let bits = prec.work_bits;
    let n_even = n.div_ceil(2);
    let n_odd = n / 2;
    let mut total = Float::new(bits);
    for (size, offset, parity) in [(n_even, 0i64, 0usize), (n_odd, 2i64, 1usize)] {
        if size == 0 {
            continue;
        }
        let entry = |l: usize, d: i64| {
            let v = table.mu(2 * l as i64 + offset - 2 * d);
            Float::with_val(bits, v)
        };
        let m: Vec<Vec<Float>> = (0..size)
            .map(|i| (0..size).map(|j| entry(i + j, 0)).collect())
            .collect();
        let d1: Vec<Vec<Float>> = (0..size)
            .map(|i| (0..size).map(|j| -entry(i + j, 1)).collect())
            .collect();
        let factor = ScalarLdl::new(&m).map_err(|k| Error::PrecisionFailure {
            index: 2 * k + parity,
            work_bits: bits,
        })?;
        let x = factor.solve_columns(&d1);
        let tr_x = (0..size).fold(Float::new(bits), |acc, i| acc + &x[i][i]);
        if order == 1 {
            total += tr_x;
            continue;
        }
        let d2: Vec<Vec<Float>> = (0..size)
            .map(|i| (0..size).map(|j| entry(i + j, 2)).collect())
            .collect();
        let y = factor.solve_columns(&d2);
        let mut tr = (0..size).fold(Float::new(bits), |acc, i| acc + &y[i][i]);
        for i in 0..size {
            for k in 0..size {
                tr -= Float::with_val(bits, &x[i][k] * &x[k][i]);
            }
        }
        total += tr;
    }
    Ok(total)
}

/// Plain LDLᵀ with column solves, for the trace identities.
struct ScalarLdl {
    l: Vec<Vec<Float>>,
    d: Vec<Float>,
}

impl ScalarLdl {
    fn new(a: &[Vec<Float>]) -> std::result::Result<Self, usize> {
        let n = a.len();
        let bits = a[0][0].prec();
        let mut l = vec![vec![Float::new(bits); n]; n];
        let mut d: Vec<Float> = Vec::with_capacity(n);
        for j in 0..n {
            let mut dj = a[j][j].clone();
            for k in 0..j {
                dj -= Float::with_val(bits, l[j][k].square_ref()) * &d[k];
            }
            if dj <= 0 {
                return Err(j);
            }
            l[j][j] = Float::with_val(bits, 1);
            for i in (j + 1)..n {
                let mut v = a[i][j].clone();
                for k in 0..j {
                    v -= Float::with_val(bits, &l[i][k] * &l[j][k]) * &d[k];
                }
                l[i][j] = v / &dj;
            }
            d.push(dj);
        }
        Ok(ScalarLdl { l, d })
    }

    /// `A⁻¹ B`, returned row-major.
    fn solve_columns(&self, b: &[Vec<Float>]) -> Vec<Vec<Float>> {
        let n = self.d.len();
        let bits = self.d[0].prec();
        let mut out = vec![vec![Float::new(bits); n]; n];
        for col in 0..n {
            let mut y: Vec<Float> = (0..n).map(|i| b[i][col].clone()).collect();
            for i in 0..n {
                for k in 0..i {
                    let s = Float::with_val(bits, &self.l[i][k] * &y[k]);
                    y[i] -= s;
                }
            }
            for i in 0..n {
                y[i] /= &self.d[i];
            }
            for i in (0..n).rev() {
                for k in (i + 1)..n {
                    let s = Float::with_val(bits, &self.l[k][i] * &y[k]);
                    y[i] -= s;
                }
            }
            for i in 0..n {
                out[i][col] = y[i].clone();
            }
        }
        out
    }
}
