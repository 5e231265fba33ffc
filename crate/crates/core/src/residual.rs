//! Residual bookkeeping shared by every identity check.

use rug::Float;

use crate::precision::log2_abs;

/// Residual of an identity written as `Σ terms = 0`: the absolute sum
/// divided by the largest term when that exceeds one, absolute otherwise.
pub fn balance(terms: &[Float]) -> Float {
    let bits = terms.iter().map(|x| x.prec()).max().unwrap_or(64);
    let mut sum = Float::new(bits);
    let mut scale = Float::with_val(bits, 1);
    for x in terms {
        sum += x;
        let a = Float::with_val(bits, x.abs_ref());
        if a > scale {
            scale = a;
        }
    }
    sum.abs() / scale
}

/// `|lhs - rhs|` relative to `max(1, |lhs|, |rhs|)`.
pub fn mismatch(lhs: &Float, rhs: &Float) -> Float {
    balance(&[lhs.clone(), -rhs.clone()])
}

#[derive(Clone, Debug)]
pub struct Residual {
    pub identity: String,
    pub n: usize,
    pub t: Float,
    pub value: Float,
}

impl Residual {
    pub fn log2(&self) -> f64 {
        log2_abs(&self.value)
    }
}

#[derive(Clone, Debug, Default)]
pub struct ResidualReport {
    pub entries: Vec<Residual>,
}

impl ResidualReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, identity: &str, n: usize, t: &Float, value: Float) {
        self.entries.push(Residual {
            identity: identity.to_string(),
            n,
            t: t.clone(),
            value,
        });
    }

    pub fn extend(&mut self, other: ResidualReport) {
        self.entries.extend(other.entries);
    }

    /// Identity names in first-seen order.
    pub fn identities(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for e in &self.entries {
            if !out.contains(&e.identity) {
                out.push(e.identity.clone());
            }
        }
        out
    }

    pub fn max_for(&self, identity: &str) -> Option<&Residual> {
        self.entries
            .iter()
            .filter(|e| e.identity == identity)
            .max_by(|a, b| a.value.partial_cmp(&b.value).expect("residuals are finite"))
    }

    pub fn worst(&self) -> Option<&Residual> {
        self.entries
            .iter()
            .max_by(|a, b| a.value.partial_cmp(&b.value).expect("residuals are finite"))
    }

    pub fn violations(&self, tol: &Float) -> Vec<&Residual> {
        self.entries
            .iter()
            .filter(|e| e.value.is_nan() || e.value > *tol)
            .collect()
    }

    pub fn all_within(&self, tol: &Float) -> bool {
        self.violations(tol).is_empty()
    }

    /// Sorted by identity, then `n`, then `t`.
    pub fn sort(&mut self) {
        self.entries.sort_by(|a, b| {
            a.identity
                .cmp(&b.identity)
                .then(a.n.cmp(&b.n))
                .then(a.t.partial_cmp(&b.t).expect("finite t"))
        });
    }
}
