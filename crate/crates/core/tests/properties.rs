mod common;

use common::*;
use hankel_p3::difference::{self, Quantity};
use hankel_p3::jet::Jet;
use hankel_p3::ladder::compute_at;
use hankel_p3::moments::{eval_moment, WeightSpec};
use hankel_p3::residual::{balance, mismatch};
use hankel_p3::scaling::{eval_series, Regime, SeriesExpansion, SeriesName, Truncation};
use hankel_p3::PrecisionConfig;
use proptest::prelude::*;
use rug::{Float, Rational};

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 24,
        ..ProptestConfig::default()
    }
}

/// Rational α in (-1, 1) away from 0 and away from the poles of the
/// small-s coefficients.
fn alpha_strategy() -> impl Strategy<Value = Rational> {
    (1i64..=9, 2i64..=11, any::<bool>())
        .prop_filter("proper fraction", |(p, q, _)| p < q)
        .prop_map(|(p, q, neg)| Rational::from((if neg { -p } else { p }, q)))
}

proptest! {
    #![proptest_config(config())]

    /// Integration by parts: (k+1)μ_k - 2μ_{k+2} + 2tμ_{k-2} = 0.
    #[test]
    fn moments_satisfy_parts_relation(k in -4i64..14, tv in 0.001f64..50.0) {
        let prec = PrecisionConfig::with_bits(256, 8).unwrap();
        let t = fl(256, tv);
        let spec = WeightSpec::gaussian(t.clone()).unwrap();
        let m = |j| eval_moment(&spec, j, &prec).unwrap();
        let terms = [
            Float::with_val(256, m(k) * (k + 1)),
            -Float::with_val(256, m(k + 2) * 2u32),
            Float::with_val(256, m(k - 2) * &t) * 2u32,
        ];
        prop_assert!(balance(&terms).to_f64() < 1e-60);
    }

    #[test]
    fn norms_positive_and_beta_consistent(tv in 0.001f64..100.0) {
        let prec = PrecisionConfig::for_order(16);
        let t = fl(prec.work_bits, tv);
        let (rec, aux) = compute_at(&t, 16, &prec).unwrap();
        prop_assert!(rec.h.iter().all(|h| *h > 0));
        for n in 1..=16 {
            // β_n = (n + r_n)/2
            let b = Float::with_val(prec.work_bits, &aux.r[n] + n as u32) / 2u32;
            prop_assert!(mismatch(&rec.beta[n], &b) < prec.tolerance());
        }
    }

    #[test]
    fn recursions_track_factorization(tv in 0.05f64..20.0) {
        let prec = PrecisionConfig::with_bits(512, 12).unwrap();
        let t = fl(512, tv);
        let (_, aux) = compute_at(&t, 12, &prec).unwrap();
        for q in [Quantity::SmallR, Quantity::BigR, Quantity::Sigma] {
            let rec = difference::run_recursion(q, &t, 10, &prec).unwrap();
            let han = difference::hankel_trace(&aux, q);
            let cmp = difference::compare_traces(&rec, &han, &fl(512, 1e-30)).unwrap();
            prop_assert!(cmp.divergence_index.is_none(), "{q} at t={tv}: {:?}", cmp.divergence_index);
        }
    }

    /// s d/ds ln Δ(s,α) = H(s,α) and d/ds H(s,α) = -C(s,α)/2, termwise in
    /// both regimes, over the exponents all three series carry.
    #[test]
    fn parametric_series_are_consistent(alpha in alpha_strategy()) {
        for regime in [Regime::SmallS, Regime::LargeS] {
            let c = SeriesExpansion::parametric(SeriesName::C, regime, &alpha).unwrap();
            let h = SeriesExpansion::parametric(SeriesName::H, regime, &alpha).unwrap();
            let d = SeriesExpansion::parametric(SeriesName::Delta, regime, &alpha).unwrap();
            prop_assert!(c.is_well_formed() && h.is_well_formed() && d.is_well_formed());
            let in_range = |e: &Rational, s: &SeriesExpansion| match regime {
                Regime::SmallS => *e <= s.terms.last().unwrap().exponent,
                Regime::LargeS => *e >= s.terms.last().unwrap().exponent,
            };
            for term in d.s_derivative() {
                if in_range(&term.exponent, &h) {
                    prop_assert_eq!(&term.coefficient, &h.coefficient(&term.exponent), "{} {}", regime, term.exponent);
                }
            }
            let half_c = |e: &Rational| (c.coefficient(e) * Rational::from((-1, 2)));
            for term in h.derivative().unwrap_or_default() {
                if in_range(&term.exponent, &c) {
                    prop_assert_eq!(&term.coefficient, &half_c(&term.exponent), "{} {}", regime, term.exponent);
                }
            }
        }
    }

    #[test]
    fn optimal_truncation_bound_is_attained(sv in 0.01f64..0.3) {
        let ser = SeriesExpansion::composite(SeriesName::C1, Regime::SmallS).unwrap();
        let s = fl(256, sv);
        let auto = eval_series(&ser, &s, Truncation::Auto).unwrap();
        let full = eval_series(&ser, &s, Truncation::Terms(ser.terms.len())).unwrap();
        let gap = abs_err(&auto.value, &full.value);
        // omitted terms decrease in magnitude for small s, so the gap is
        // at most a few times the first omitted term
        prop_assert!(gap <= 2.0 * auto.next_term_bound.to_f64() + 1e-70);
    }

    #[test]
    fn jet_division_inverts_multiplication(a in prop::collection::vec(-10.0f64..10.0, 4), b0 in 0.5f64..5.0, b in prop::collection::vec(-3.0f64..3.0, 3)) {
        let x = Jet::from_coeffs(a.iter().map(|v| fl(192, *v)).collect());
        let mut yc = vec![fl(192, b0)];
        yc.extend(b.iter().map(|v| fl(192, *v)));
        let y = Jet::from_coeffs(yc);
        let back = x.mul(&y).div(&y);
        for k in 0..4 {
            prop_assert!(abs_err(back.coeff(k), x.coeff(k)) < 1e-45);
        }
        let lx = y.ln().differentiate();
        let dy = y.differentiate().div(&y.truncate(2));
        for k in 0..3 {
            prop_assert!(abs_err(lx.coeff(k), dy.coeff(k)) < 1e-45);
        }
    }

    #[test]
    fn tolerance_tracks_precision(work in 128u32..4096, n in 0usize..200) {
        let p = PrecisionConfig::with_bits(work, n).unwrap();
        prop_assert!(p.guard_bits < p.work_bits);
        prop_assert!(p.tolerance_bits() > 0);
        let d = p.doubled();
        prop_assert!(d.tolerance_bits() > p.tolerance_bits());
        let x = fl(work, 1.0 / 3.0);
        prop_assert_eq!(p.parse(&p.format(&x)).unwrap(), x);
    }
}

/// The composite C₂(s) mirrors C₁(s) with α → -α.
#[test]
fn composite_mirror_symmetry() {
    let c1 = SeriesExpansion::composite(SeriesName::C1, Regime::LargeS).unwrap();
    let c2 = SeriesExpansion::composite(SeriesName::C2, Regime::LargeS).unwrap();
    // C(s,α) with α ↦ -α flips the odd-in-α coefficients
    let one_third = Rational::from((-1, 3));
    assert_eq!(c1.coefficient(&one_third), c2.coefficient(&one_third));
    let two_thirds = Rational::from((-2, 3));
    assert_eq!(c1.coefficient(&two_thirds), -c2.coefficient(&two_thirds));
}
