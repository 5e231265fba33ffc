//! Working precision and the residual tolerance derived from it.

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary working precision shared by every computation, plus the policy
/// that turns it into an acceptance threshold.
///
/// The residual threshold is `2^-(work_bits - guard_bits - tol_exponent)`.
/// `guard_bits` absorbs the digits lost in the moment factorization, whose
/// conditioning degrades with the Hankel order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionConfig {
    pub work_bits: u32,
    pub guard_bits: u32,
    pub tol_exponent: i32,
}

impl PrecisionConfig {
    pub fn new(work_bits: u32, guard_bits: u32, tol_exponent: i32) -> Result<Self> {
        if work_bits < 64 {
            return Err(Error::InvalidPrecision(format!(
                "work_bits = {work_bits} is below the 64-bit floor"
            )));
        }
        if guard_bits >= work_bits {
            return Err(Error::InvalidPrecision(format!(
                "guard_bits = {guard_bits} must be below work_bits = {work_bits}"
            )));
        }
        let cfg = PrecisionConfig {
            work_bits,
            guard_bits,
            tol_exponent,
        };
        if cfg.tolerance_bits() <= 0 {
            return Err(Error::InvalidPrecision(format!(
                "tolerance 2^-{} is not below one",
                cfg.tolerance_bits()
            )));
        }
        Ok(cfg)
    }

    /// Precision with the default guard for a factorization of order `n_max`.
    pub fn with_bits(work_bits: u32, n_max: usize) -> Result<Self> {
        Self::new(work_bits, default_guard(work_bits, n_max), 0)
    }

    /// Default policy: `max(256, 64 + 12 n_max)` working bits.
    pub fn for_order(n_max: usize) -> Self {
        let work = (64 + 12 * n_max as u32).max(256);
        Self::with_bits(work, n_max).expect("policy precision is valid")
    }

    /// Same guard/tolerance offsets at twice the working precision.
    pub fn doubled(&self) -> Self {
        PrecisionConfig {
            work_bits: self.work_bits * 2,
            guard_bits: self.guard_bits,
            tol_exponent: self.tol_exponent,
        }
    }

    /// Same guard/tolerance offsets at `factor` times the working precision.
    pub fn scaled(&self, factor: u32) -> Self {
        PrecisionConfig {
            work_bits: self.work_bits * factor,
            ..*self
        }
    }

    pub fn tolerance_bits(&self) -> i64 {
        self.work_bits as i64 - self.guard_bits as i64 - self.tol_exponent as i64
    }

    pub fn tolerance(&self) -> Float {
        let one = Float::with_val(self.work_bits, 1);
        one >> (self.tolerance_bits() as i32)
    }

    pub fn real(&self, x: f64) -> Float {
        Float::with_val(self.work_bits, x)
    }

    pub fn int(&self, x: i64) -> Float {
        Float::with_val(self.work_bits, x)
    }

    pub fn zero(&self) -> Float {
        Float::new(self.work_bits)
    }

    /// Parses a decimal literal at the working precision, so `"0.1"` is
    /// rounded once at `work_bits` rather than inherited from an `f64`.
    pub fn parse(&self, s: &str) -> Result<Float> {
        let parsed = Float::parse(s.trim())
            .map_err(|e| Error::domain(format!("cannot parse {s:?} as a real: {e}")))?;
        Ok(Float::with_val(self.work_bits, parsed))
    }

    /// Decimal digits carried by serialized values: `ceil(0.3010 work_bits)`.
    pub fn decimal_digits(&self) -> usize {
        (self.work_bits as f64 * std::f64::consts::LOG10_2).ceil() as usize
    }

    pub fn format(&self, x: &Float) -> String {
        format_real(x, self.decimal_digits())
    }
}

/// Guard bits reserved for conditioning loss. The moment-to-pivot map loses
/// about 1.5 bits per Hankel order plus a constant near 20 bits, measured
/// against a run at twice the precision for orders up to 240 and
/// `t ∈ [10⁻³, 10²]`. Residual formulas lose a little more, so the guard is
/// `2 n_max + 64`, or a quarter of the working precision if that is larger,
/// capped so at least 96 bits of tolerance remain.
pub fn default_guard(work_bits: u32, n_max: usize) -> u32 {
    let loss = 2 * n_max as u32 + 64;
    let guard = loss.max(work_bits / 4);
    guard.min(work_bits.saturating_sub(96)).max(1)
}

/// Fixed-digit scientific rendering used for all serialized reals.
pub fn format_real(x: &Float, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    x.to_string_radix(10, Some(digits.max(2)))
}

/// `|x|` as a base-2 exponent estimate, for logging residuals that
/// underflow `f64`.
pub fn log2_abs(x: &Float) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let (mantissa, exp) = x.to_f64_exp();
    mantissa.abs().log2() + exp as f64
}
