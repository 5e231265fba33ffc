//! Gauss–Legendre rules in MPFR arithmetic.

use rug::float::Constant;
use rug::Float;

use crate::error::{Error, Result};

/// Nodes and weights on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<Float>,
    pub weights: Vec<Float>,
}

/// `(P_N(x), P_N'(x))` by the three-term recurrence.
fn legendre(n: usize, x: &Float) -> (Float, Float) {
    let bits = x.prec();
    let mut p0 = Float::with_val(bits, 1);
    let mut p1 = x.clone();
    for k in 2..=n {
        let kf = k as u32;
        let mut p2 = Float::with_val(bits, x * &p1) * (2 * kf - 1);
        p2 -= Float::with_val(bits, &p0 * (kf - 1));
        p2 /= kf;
        p0 = p1;
        p1 = p2;
    }
    // P_N' = N (x P_N - P_{N-1}) / (x² - 1)
    let x2m1 = Float::with_val(bits, x.square_ref()) - 1u32;
    let dp = (Float::with_val(bits, x * &p1) - &p0) * n as u32 / x2m1;
    (p1, dp)
}

impl GaussLegendre {
    pub fn new(n: usize, bits: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("a Gauss–Legendre rule needs at least one node"));
        }
        let pi = Float::with_val(bits, Constant::Pi);
        let half = n.div_ceil(2);
        let mut pos = Vec::with_capacity(half);
        for i in 1..=half {
            // Tricomi's initial guess, then Newton
            let theta = Float::with_val(bits, &pi * (4.0 * i as f64 - 1.0)) / (4.0 * n as f64 + 2.0);
            let mut x = theta.cos();
            for _ in 0..200 {
                let (p, dp) = legendre(n, &x);
                let dx = Float::with_val(bits, &p / &dp);
                x -= &dx;
                let mag = dx.get_exp().unwrap_or(i32::MIN);
                if dx.is_zero() || mag < -(bits as i32) + 4 {
                    break;
                }
            }
            let (_, dp) = legendre(n, &x);
            let one_m_x2 = Float::with_val(bits, 1u32) - Float::with_val(bits, x.square_ref());
            let w = Float::with_val(bits, 2u32) / (one_m_x2 * Float::with_val(bits, dp.square_ref()));
            pos.push((x, w));
        }
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        // for odd n the last root is the origin, which appears once
        let mirrored = n / 2;
        for (x, w) in pos[..mirrored].iter().rev() {
            nodes.push(Float::with_val(bits, -x));
            weights.push(w.clone());
        }
        if n % 2 == 1 {
            nodes.push(Float::new(bits));
            weights.push(pos[half - 1].1.clone());
        }
        for (x, w) in pos[..mirrored].iter() {
            nodes.push(x.clone());
            weights.push(w.clone());
        }
        Ok(GaussLegendre { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes mapped to `[a, b]` with correspondingly scaled weights.
    pub fn on_interval(&self, a: &Float, b: &Float) -> Vec<(Float, Float)> {
        let bits = a.prec();
        let half = Float::with_val(bits, b - a) / 2u32;
        let mid = Float::with_val(bits, a + b) / 2u32;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| {
                (
                    Float::with_val(bits, &mid + Float::with_val(bits, &half * x)),
                    Float::with_val(bits, &half * w),
                )
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::ops::Pow;

    #[test]
    fn integrates_polynomials_exactly() {
        let bits = 200;
        for n in [1usize, 2, 5, 8] {
            let gl = GaussLegendre::new(n, bits).unwrap();
            assert_eq!(gl.len(), n);
            for deg in 0..(2 * n) {
                let mut sum = Float::new(bits);
                for (x, w) in gl.nodes.iter().zip(&gl.weights) {
                    sum += x.clone().pow(deg as u32) * w;
                }
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((sum.to_f64() - exact).abs() < 1e-14, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn converges_on_smooth_integrand() {
        let bits = 256;
        let gl = GaussLegendre::new(40, bits).unwrap();
        let a = Float::new(bits);
        let b = Float::with_val(bits, 1);
        let mut sum = Float::new(bits);
        for (x, w) in gl.on_interval(&a, &b) {
            sum += x.exp() * w;
        }
        let exact = Float::with_val(bits, 1).exp() - 1u32;
        let err = Float::with_val(bits, &sum - &exact).abs();
        assert!(err < Float::with_val(bits, 1e-70));
    }
}
