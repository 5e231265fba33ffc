//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use hankel_p3::moments::{build_moment_table, WeightSpec};
use hankel_p3::PrecisionConfig;
use rug::float::Constant;
use rug::Float;

pub fn fl(bits: u32, x: f64) -> Float {
    Float::with_val(bits, x)
}

pub fn rel_err(a: &Float, b: &Float) -> f64 {
    let d = Float::with_val(a.prec().max(b.prec()), a - b).abs();
    let scale = Float::with_val(b.prec(), b.abs_ref());
    if scale.is_zero() {
        d.to_f64()
    } else {
        (d / scale).to_f64()
    }
}

pub fn abs_err(a: &Float, b: &Float) -> f64 {
    Float::with_val(a.prec().max(b.prec()), a - b).abs().to_f64()
}

/// `count` points spaced evenly in `ln t` on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize, bits: u32) -> Vec<Float> {
    let (a, b) = (fl(bits, lo).ln(), fl(bits, hi).ln());
    (0..count)
        .map(|i| {
            let f = Float::with_val(bits, i) / (count - 1) as u32;
            (Float::with_val(bits, &b - &a) * f + &a).exp()
        })
        .collect()
}

/// `∫ x^k e^{-x²-t/x²} dx` over the real line by the trapezoid rule in
/// `u = ln x`. The integrand decays doubly exponentially at both ends and
/// is analytic in the strip `|Im u| < π/4`, so step `h` gives an error of
/// order `exp(-π²/(2h))`.
pub fn quadrature_moment(k: i64, t: &Float, bits: u32) -> Float {
    if k % 2 != 0 {
        return Float::new(bits);
    }
    let wp = bits + 32;
    let h = Float::with_val(wp, 1u32) / 128u32;
    let t = Float::with_val(wp, t);
    let f = |j: i64| -> Float {
        let u = Float::with_val(wp, &h * j);
        let e2 = Float::with_val(wp, &u * 2u32).exp();
        let expo = Float::with_val(wp, &u * (k + 1)) - &e2 - Float::with_val(wp, &t / &e2);
        expo.exp()
    };
    let mut sum = f(0);
    for dir in [1i64, -1] {
        let mut j = dir;
        let mut peaked = false;
        let mut prev = f(0);
        loop {
            let v = f(j);
            sum += &v;
            if v < prev {
                peaked = true;
            }
            if peaked && v.get_exp().unwrap_or(i32::MIN) < sum.get_exp().unwrap_or(0) - wp as i32 - 8 {
                break;
            }
            prev = v;
            j += dir;
        }
    }
    Float::with_val(bits, sum * h * 2u32)
}

/// Determinant by fraction-free (Bareiss) elimination, with row swaps on
/// zero pivots.
pub fn bareiss_det(mut a: Vec<Vec<Float>>) -> Float {
    let n = a.len();
    let bits = a[0][0].prec();
    let mut sign = 1i32;
    let mut prev = Float::with_val(bits, 1);
    for k in 0..n.saturating_sub(1) {
        if a[k][k].is_zero() {
            let Some(r) = (k + 1..n).find(|&r| !a[r][k].is_zero()) else {
                return Float::new(bits);
            };
            a.swap(k, r);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = Float::with_val(bits, &a[i][j] * &a[k][k]) - Float::with_val(bits, &a[i][k] * &a[k][j]);
                a[i][j] = v / &prev;
            }
            a[i][k] = Float::new(bits);
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if sign < 0 {
        -d
    } else {
        d
    }
}

/// `ln D_n(t)` for the Gaussian weight, Bareiss at `bits` on library moments.
pub fn oracle_log_det(n: usize, t: &Float, bits: u32) -> Float {
    if n == 0 {
        return Float::new(bits);
    }
    let prec = PrecisionConfig::with_bits(bits, n).unwrap();
    let spec = WeightSpec::gaussian(Float::with_val(bits, t)).unwrap();
    let table = build_moment_table(&spec, 0, 2 * n as i64 - 2, &prec).unwrap();
    let m: Vec<Vec<Float>> = (0..n)
        .map(|i| (0..n).map(|j| table.mu((i + j) as i64).clone()).collect())
        .collect();
    bareiss_det(m).ln()
}

/// Five-point central difference of `f` at `x` with step `h`.
pub fn central_derivative(f: impl Fn(&Float) -> Float, x: &Float, h: &Float) -> Float {
    let bits = x.prec();
    let at = |k: i32| f(&(Float::with_val(bits, h * k) + x));
    let num = at(-2) - Float::with_val(bits, at(-1) * 8u32) + Float::with_val(bits, at(1) * 8u32) - at(2);
    num / Float::with_val(bits, h * 12u32)
}

/// `σ_n(t) = 2t d/dt ln D_n` by finite differences of Bareiss determinants.
pub fn oracle_sigma(n: usize, t: &Float, bits: u32) -> Float {
    let h = Float::with_val(bits, 1e-15);
    let d = central_derivative(|x| oracle_log_det(n, x, bits), t, &h);
    d * Float::with_val(bits, t * 2u32)
}

/// `R_n(t) = -2t d/dt ln(D_{n+1}/D_n)` by finite differences.
pub fn oracle_big_r(n: usize, t: &Float, bits: u32) -> Float {
    let h = Float::with_val(bits, 1e-15);
    let d = central_derivative(
        |x| oracle_log_det(n + 1, x, bits) - oracle_log_det(n, x, bits),
        t,
        &h,
    );
    d * Float::with_val(bits, t * -2i32)
}

/// `β_n = D_{n+1}D_{n-1}/D_n²`.
pub fn oracle_beta(n: usize, t: &Float, bits: u32) -> Float {
    let l = |m| oracle_log_det(m, t, bits);
    (l(n + 1) + l(n - 1) - Float::with_val(bits, l(n) * 2u32)).exp()
}

pub fn sqrt_pi(bits: u32) -> Float {
    Float::with_val(bits, Constant::Pi).sqrt()
}
