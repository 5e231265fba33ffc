//! Truncated Taylor series in `t` ("jets") over multiprecision reals.
//!
//! A jet of order `K` stores `f(t0), f'(t0), f''(t0)/2!, ..., f^(K)(t0)/K!`.
//! Propagating jets through the moment factorization yields exact
//! `t`-derivatives of every pivot without finite differences.

use std::fmt;

use rug::Float;

#[derive(Clone, PartialEq)]
pub struct Jet {
    coeffs: Vec<Float>,
    prec: u32,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.coeffs.iter().map(|c| c.to_f64()))
            .finish()
    }
}

fn factorial(k: usize) -> u64 {
    (1..=k as u64).product()
}

impl Jet {
    pub fn zero(order: usize, prec: u32) -> Self {
        Jet {
            coeffs: (0..=order).map(|_| Float::new(prec)).collect(),
            prec,
        }
    }

    pub fn constant(value: Float, order: usize) -> Self {
        let prec = value.prec();
        let mut j = Jet::zero(order, prec);
        j.coeffs[0] = value;
        j
    }

    /// The identity jet `t` expanded at `t0`.
    pub fn variable(t0: &Float, order: usize) -> Self {
        let prec = t0.prec();
        let mut j = Jet::constant(Float::with_val(prec, t0), order);
        if order >= 1 {
            j.coeffs[1] = Float::with_val(prec, 1);
        }
        j
    }

    pub fn from_coeffs(coeffs: Vec<Float>) -> Self {
        assert!(!coeffs.is_empty(), "a jet needs at least a value");
        let prec = coeffs[0].prec();
        Jet { coeffs, prec }
    }

    /// Builds a jet from `f, f', f'', ...`.
    pub fn from_derivatives(derivs: Vec<Float>) -> Self {
        let coeffs = derivs
            .into_iter()
            .enumerate()
            .map(|(k, d)| d / factorial(k))
            .collect();
        Jet::from_coeffs(coeffs)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn value(&self) -> &Float {
        &self.coeffs[0]
    }

    pub fn coeff(&self, k: usize) -> &Float {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[Float] {
        &self.coeffs
    }

    /// `f^(k)(t0)`.
    pub fn deriv(&self, k: usize) -> Float {
        Float::with_val(self.prec, &self.coeffs[k] * factorial(k))
    }

    pub fn truncate(&self, order: usize) -> Jet {
        let order = order.min(self.order());
        Jet {
            coeffs: self.coeffs[..=order].to_vec(),
            prec: self.prec,
        }
    }

    /// Jet of `f'`, one order shorter.
    pub fn differentiate(&self) -> Jet {
        if self.order() == 0 {
            return Jet::zero(0, self.prec);
        }
        let coeffs = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(k, c)| Float::with_val(self.prec, c * (k as u32 + 1)))
            .collect();
        Jet {
            coeffs,
            prec: self.prec,
        }
    }

    fn common_order(&self, other: &Jet) -> usize {
        self.order().min(other.order())
    }

    pub fn add(&self, other: &Jet) -> Jet {
        let k = self.common_order(other);
        let coeffs = (0..=k)
            .map(|i| Float::with_val(self.prec, &self.coeffs[i] + &other.coeffs[i]))
            .collect();
        Jet {
            coeffs,
            prec: self.prec,
        }
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        let k = self.common_order(other);
        let coeffs = (0..=k)
            .map(|i| Float::with_val(self.prec, &self.coeffs[i] - &other.coeffs[i]))
            .collect();
        Jet {
            coeffs,
            prec: self.prec,
        }
    }

    pub fn neg(&self) -> Jet {
        Jet {
            coeffs: self.coeffs.iter().map(|c| Float::with_val(self.prec, -c)).collect(),
            prec: self.prec,
        }
    }

    pub fn scale(&self, s: &Float) -> Jet {
        Jet {
            coeffs: self
                .coeffs
                .iter()
                .map(|c| Float::with_val(self.prec, c * s))
                .collect(),
            prec: self.prec,
        }
    }

    pub fn scale_i(&self, s: i64) -> Jet {
        Jet {
            coeffs: self
                .coeffs
                .iter()
                .map(|c| Float::with_val(self.prec, c * s))
                .collect(),
            prec: self.prec,
        }
    }

    pub fn add_scalar(&self, s: &Float) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += s;
        out
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        let k = self.common_order(other);
        let mut coeffs = Vec::with_capacity(k + 1);
        for n in 0..=k {
            let mut acc = Float::new(self.prec);
            for i in 0..=n {
                acc += &self.coeffs[i] * &other.coeffs[n - i];
            }
            coeffs.push(acc.clone());
        }
        Jet {
            coeffs,
            prec: self.prec,
        }
    }

    /// `self - a * b` fused, the inner step of every elimination.
    pub fn sub_mul(&self, a: &Jet, b: &Jet) -> Jet {
        let k = self.common_order(a).min(b.order());
        let mut coeffs = Vec::with_capacity(k + 1);
        for n in 0..=k {
            let mut acc = self.coeffs[n].clone();
            for i in 0..=n {
                acc -= &a.coeffs[i] * &b.coeffs[n - i];
            }
            coeffs.push(acc);
        }
        Jet {
            coeffs,
            prec: self.prec,
        }
    }

    pub fn div(&self, other: &Jet) -> Jet {
        let k = self.common_order(other);
        let b0 = &other.coeffs[0];
        let mut q: Vec<Float> = Vec::with_capacity(k + 1);
        for n in 0..=k {
            let mut acc = self.coeffs[n].clone();
            for j in 0..n {
                acc -= &q[j] * &other.coeffs[n - j];
            }
            acc /= b0;
            q.push(acc);
        }
        Jet {
            coeffs: q,
            prec: self.prec,
        }
    }

    pub fn recip(&self) -> Jet {
        Jet::constant(Float::with_val(self.prec, 1), self.order()).div(self)
    }

    pub fn square(&self) -> Jet {
        self.mul(self)
    }

    pub fn powi(&self, e: u32) -> Jet {
        let mut out = Jet::constant(Float::with_val(self.prec, 1), self.order());
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// `ln f`, requiring `f(t0) > 0`.
    pub fn ln(&self) -> Jet {
        let k = self.order();
        let a0 = &self.coeffs[0];
        let mut l: Vec<Float> = Vec::with_capacity(k + 1);
        l.push(Float::with_val(self.prec, a0.ln_ref()));
        // n a_0 l_n = n a_n - sum_{j=1}^{n-1} j l_j a_{n-j}
        for n in 1..=k {
            let mut acc = Float::with_val(self.prec, &self.coeffs[n] * n as u32);
            for j in 1..n {
                acc -= Float::with_val(self.prec, &l[j] * &self.coeffs[n - j]) * j as u32;
            }
            acc /= a0;
            acc /= n as u32;
            l.push(acc);
        }
        Jet {
            coeffs: l,
            prec: self.prec,
        }
    }

    /// Evaluates the truncated series at displacement `h`.
    pub fn eval_at(&self, h: &Float) -> Float {
        let mut acc = Float::new(self.prec);
        for c in self.coeffs.iter().rev() {
            acc *= h;
            acc += c;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 200;

    fn f(x: f64) -> Float {
        Float::with_val(P, x)
    }

    fn close(a: &Float, b: f64, tol: f64) -> bool {
        (a.to_f64() - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn product_rule() {
        // f = t^2, g = 1/t at t0 = 2.
        let t = Jet::variable(&f(2.0), 3);
        let sq = t.mul(&t);
        let inv = t.recip();
        let prod = sq.mul(&inv);
        assert!(close(prod.value(), 2.0, 1e-15));
        assert!(close(&prod.deriv(1), 1.0, 1e-15));
        assert!(close(&prod.deriv(2), 0.0, 1e-15));
        assert!(close(&prod.deriv(3), 0.0, 1e-15));
        assert!(close(&inv.deriv(2), 2.0 / 8.0, 1e-15));
        assert!(close(&inv.deriv(3), -6.0 / 16.0, 1e-15));
    }

    #[test]
    fn log_derivatives() {
        // ln(t^3) derivatives at t0=1.5: 3/t, -3/t^2, 6/t^3
        let t = Jet::variable(&f(1.5), 3);
        let l = t.powi(3).ln();
        assert!(close(l.value(), 3.0 * 1.5f64.ln(), 1e-15));
        assert!(close(&l.deriv(1), 2.0, 1e-15));
        assert!(close(&l.deriv(2), -3.0 / 2.25, 1e-15));
        assert!(close(&l.deriv(3), 6.0 / 3.375, 1e-15));
    }

    #[test]
    fn differentiate_shifts() {
        let t = Jet::variable(&f(3.0), 3);
        let cube = t.powi(3);
        let d = cube.differentiate();
        assert_eq!(d.order(), 2);
        assert!(close(d.value(), 27.0, 1e-15));
        assert!(close(&d.deriv(1), 18.0, 1e-15));
        assert!(close(&d.deriv(2), 6.0, 1e-15));
    }

    #[test]
    fn horner_evaluation() {
        let t = Jet::variable(&f(1.0), 2);
        let sq = t.mul(&t);
        assert!(close(&sq.eval_at(&f(0.5)), 2.25, 1e-15));
    }
}
