//! Constants of the large-s expansions: Barnes G values and `ζ'(-1)`.

use rug::float::Constant;
use rug::{Float, Rational};

use crate::error::{Error, Result};

fn below(x: &Float, bits: u32) -> bool {
    x.is_zero() || x.get_exp().is_some_and(|e| e < -(bits as i32) - 8)
}

/// `ln G(1+z)` for `|z| ≤ 1/2` from its Taylor series at the origin,
/// `(z/2)ln 2π - (z + (1+γ)z²)/2 + Σ_{k≥2} (-1)^k ζ(k) z^{k+1}/(k+1)`.
fn ln_barnes_taylor(z: &Float) -> Float {
    let bits = z.prec();
    let two_pi = Float::with_val(bits, Constant::Pi) * 2u32;
    let gamma = Float::with_val(bits, Constant::Euler);
    let z2 = Float::with_val(bits, z.square_ref());
    let mut sum = Float::with_val(bits, z * two_pi.ln()) / 2u32;
    sum -= (Float::with_val(bits, z + &z2) + Float::with_val(bits, &z2 * &gamma)) / 2u32;
    let mut zk = Float::with_val(bits, &z2 * z);
    for k in 2u32.. {
        let mut term = Float::with_val(bits, Float::zeta_u(k)) * &zk / (k + 1);
        if k % 2 == 1 {
            term = -term;
        }
        if below(&term, bits) {
            break;
        }
        sum += term;
        zk *= z;
    }
    sum
}

/// `ln G(1+z)` for real `z > -1`, shifting into `[-1/2, 1/2]` with
/// `G(1+z) = Γ(z)G(z)`.
pub fn ln_barnes_g_1p(z: &Float) -> Result<Float> {
    let bits = z.prec();
    if !(*z > -1) {
        return Err(Error::domain("ln G(1+z) needs z > -1"));
    }
    let mut w = z.clone();
    let mut shift = Float::new(bits);
    while w > 0.5 {
        // ln G(1+w) = ln Γ(w) + ln G(w)
        shift += Float::with_val(bits, w.ln_gamma_ref());
        w -= 1u32;
    }
    while w < -0.5 {
        // ln G(1+w) = ln G(2+w) - ln Γ(1+w)
        let up = Float::with_val(bits, &w + 1u32);
        shift -= Float::with_val(bits, up.ln_gamma_ref());
        w = up;
    }
    Ok(ln_barnes_taylor(&w) + shift)
}

/// `c(α) = ln[G(1+α)/(2π)^{α/2}]`.
pub fn barnes_constant(alpha: &Rational, bits: u32) -> Result<Float> {
    let a = Float::with_val(bits, alpha);
    let ln_2pi = (Float::with_val(bits, Constant::Pi) * 2u32).ln();
    Ok(ln_barnes_g_1p(&a)? - Float::with_val(bits, &a * &ln_2pi) / 2u32)
}

/// `ln A` for the Glaisher constant, from the Euler–Maclaurin expansion of
/// `Σ_{k≤N} k ln k`; the tail uses `B_{2j} = (-1)^{j+1} 2(2j)! ζ(2j)/(2π)^{2j}`.
pub fn ln_glaisher(bits: u32) -> Float {
    let wp = bits + 32;
    let n = (bits / 2).max(32);
    let nf = Float::with_val(wp, n);
    let mut s = Float::new(wp);
    for k in 2..=n {
        let kf = Float::with_val(wp, k);
        s += Float::with_val(wp, kf.ln_ref()) * k;
    }
    let n2 = Float::with_val(wp, nf.square_ref());
    let lead = Float::with_val(wp, &n2 / 2u32) + Float::with_val(wp, &nf / 2u32) + Float::with_val(wp, 12u32).recip();
    let mut ln_a = s - lead * Float::with_val(wp, nf.ln_ref()) + Float::with_val(wp, &n2 / 4u32);
    let two_pi_n = Float::with_val(wp, Constant::Pi) * 2u32 * &nf;
    let two_pi_n_sq = Float::with_val(wp, two_pi_n.square_ref());
    let two_pi_sq = Float::with_val(wp, &two_pi_n_sq / &n2);
    // j = 2: 2·1!·ζ(4)/((2π)⁴ N²), sign (-1)^{j+1}
    let mut scale = Float::with_val(wp, 2u32) / (Float::with_val(wp, two_pi_sq.square_ref()) * &n2);
    let mut prev: Option<Float> = None;
    for j in 2u32.. {
        if j > 2 {
            // (2j-3)!/(2j-5)! and one more factor of (2πN)²
            scale *= (2 * j - 3) * (2 * j - 4);
            scale /= &two_pi_n_sq;
        }
        let mut term = Float::with_val(wp, Float::zeta_u(2 * j)) * &scale;
        if j % 2 == 0 {
            term = -term;
        }
        let mag = Float::with_val(wp, term.abs_ref());
        if below(&mag, wp) || prev.as_ref().is_some_and(|p| mag > *p) {
            break;
        }
        ln_a += &term;
        prev = Some(mag);
    }
    Float::with_val(bits, ln_a)
}

/// `ζ'(-1) = 1/12 - ln A`.
pub fn zeta_prime_minus_one(bits: u32) -> Float {
    Float::with_val(bits, 12u32).recip() - ln_glaisher(bits)
}

/// `ln 2/12 + 3ζ'(-1)`, via the Glaisher constant.
pub fn dyson_constant(bits: u32) -> Float {
    let ln2 = Float::with_val(bits, Constant::Log2);
    ln2 / 12u32 + zeta_prime_minus_one(bits) * 3u32
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Float, b: &Float, eps: f64) -> bool {
        Float::with_val(a.prec(), a - b).abs().to_f64() < eps
    }

    #[test]
    fn glaisher_reference_digits() {
        let bits = 256;
        let expect = Float::with_val(bits, Float::parse("0.24875447703378426254725299357611").unwrap());
        assert!(close(&ln_glaisher(bits), &expect, 1e-31));
        let zp = Float::with_val(bits, Float::parse("-0.16542114370045092921391966024278").unwrap());
        assert!(close(&zeta_prime_minus_one(bits), &zp, 1e-31));
    }

    #[test]
    fn barnes_g_special_values() {
        let bits = 200;
        // G(1) = G(2) = G(3) = 1, G(4) = 2
        for (z, v) in [(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 2f64.ln())] {
            let g = ln_barnes_g_1p(&Float::with_val(bits, z)).unwrap();
            assert!((g.to_f64() - v).abs() < 1e-40, "z={z}");
        }
        let half = Float::with_val(bits, -0.5);
        let g = ln_barnes_g_1p(&half).unwrap().exp();
        assert!((g.to_f64() - 0.603_244_281_209_446_2).abs() < 1e-15);
    }

    #[test]
    fn barnes_route_matches_glaisher_route() {
        let bits = 256;
        let sum = barnes_constant(&Rational::from((1, 2)), bits).unwrap()
            + barnes_constant(&Rational::from((-1, 2)), bits).unwrap();
        assert!(close(&sum, &dyson_constant(bits), 1e-60));
        assert!((sum.to_f64() + 0.438_501_166_054_690_7).abs() < 1e-15);
    }

    #[test]
    fn rejects_poles() {
        assert!(ln_barnes_g_1p(&Float::with_val(64, -1)).is_err());
    }
}
