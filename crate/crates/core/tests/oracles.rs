mod common;

use common::*;
use hankel_p3::hankel::{gaussian_table, hankel_determinant, hermite_log_det};
use hankel_p3::ladder::compute_at;
use hankel_p3::moments::{eval_moment, WeightSpec};
use hankel_p3::painleve::{self, QuadratureParams};
use hankel_p3::PrecisionConfig;
use rug::Float;

#[test]
fn moments_match_quadrature() {
    let bits = 256;
    let prec = PrecisionConfig::with_bits(bits, 4).unwrap();
    for tv in [0.05, 0.5, 3.0] {
        let t = fl(bits, tv);
        let spec = WeightSpec::gaussian(t.clone()).unwrap();
        for k in (-6..=10).step_by(2) {
            let lib = eval_moment(&spec, k, &prec).unwrap();
            let q = quadrature_moment(k, &t, bits);
            assert!(rel_err(&lib, &q) < 1e-60, "t={tv} k={k}: {lib} vs {q}");
        }
        assert!(eval_moment(&spec, 3, &prec).unwrap().is_zero());
    }
}

#[test]
fn unperturbed_moments_are_gamma_values() {
    let bits = 192;
    let prec = PrecisionConfig::with_bits(bits, 4).unwrap();
    let spec = WeightSpec::gaussian(Float::new(bits)).unwrap();
    // μ_{2j}(0) = Γ(j + 1/2)
    for j in 0..8u32 {
        let lib = eval_moment(&spec, 2 * j as i64, &prec).unwrap();
        let g = Float::with_val(bits, Float::with_val(bits, j) + 0.5).gamma();
        assert!(rel_err(&lib, &g) < 1e-50);
    }
}

#[test]
fn log_det_matches_bareiss() {
    let bits = 512;
    let prec = PrecisionConfig::with_bits(bits, 24).unwrap();
    for tv in [0.01, 1.0, 7.5] {
        let t = fl(bits, tv);
        let table = gaussian_table(&t, 24, 0, &prec).unwrap();
        for n in [1usize, 2, 5, 12, 24] {
            let lib = hankel_determinant(&table, n, &prec).unwrap();
            let orc = oracle_log_det(n, &t, 4 * bits);
            assert!(abs_err(&lib, &orc) < 1e-80, "t={tv} n={n}");
        }
    }
}

#[test]
fn hermite_product_matches_bareiss_at_zero() {
    let bits = 256;
    for n in [1usize, 3, 10] {
        let lib = hermite_log_det(n, bits);
        let orc = oracle_log_det(n, &Float::new(bits), 2 * bits);
        assert!(abs_err(&lib, &orc) < 1e-60);
    }
}

#[test]
fn aux_quantities_match_finite_differences() {
    let bits = 512;
    let prec = PrecisionConfig::with_bits(bits, 10).unwrap();
    for tv in [0.2, 2.0] {
        let t = fl(bits, tv);
        let (rec, aux) = compute_at(&t, 9, &prec).unwrap();
        for n in [1usize, 4, 9] {
            let s = oracle_sigma(n, &t, bits);
            assert!(abs_err(&aux.sigma[n], &s) < 1e-45, "sigma t={tv} n={n}");
            let r = oracle_big_r(n, &t, bits);
            assert!(abs_err(&aux.big_r[n], &r) < 1e-45, "R t={tv} n={n}");
            let b = oracle_beta(n, &t, bits);
            assert!(rel_err(&rec.beta[n], &b) < 1e-80, "beta t={tv} n={n}");
            // r_n = 2β_n - n
            let r_small = Float::with_val(bits, &b * 2u32) - n as u32;
            assert!(abs_err(&aux.r[n], &r_small) < 1e-80, "r t={tv} n={n}");
        }
    }
}

#[test]
fn sigma_derivative_matches_finite_difference_of_sigma() {
    let bits = 512;
    let prec = PrecisionConfig::with_bits(bits, 6).unwrap();
    let t = fl(bits, 1.5);
    let (_, aux) = compute_at(&t, 5, &prec).unwrap();
    let h = fl(bits, 1e-15);
    for n in [2usize, 5] {
        let d = central_derivative(
            |x| compute_at(x, 5, &prec).unwrap().1.sigma[n].clone(),
            &t,
            &h,
        );
        assert!(abs_err(&aux.dsigma[n], &d) < 1e-45);
        let d2 = central_derivative(
            |x| compute_at(x, 5, &prec).unwrap().1.dsigma[n].clone(),
            &t,
            &h,
        );
        assert!(abs_err(&aux.d2sigma[n], &d2) < 1e-45);
    }
}

#[test]
fn integrated_r_matches_factorization_along_the_way() {
    let prec = PrecisionConfig::with_bits(256, 4).unwrap();
    let t0 = fl(256, 0.5);
    let init = painleve::initial_state(4, &t0, &prec).unwrap();
    let ctl = painleve::StepControl::new(fl(256, 1e-30));
    for end in [0.75, 1.5, 3.0] {
        let t1 = fl(256, end);
        let out = painleve::integrate_p3(4, &t0, &t1, &init, &prec, &ctl).unwrap();
        let (r, dr) = painleve::big_r_with_derivative(4, &t1, &prec).unwrap();
        assert!(abs_err(&out.state.y, &r) < 1e-25, "t1={end}");
        assert!(abs_err(&out.state.dy, &dr) < 1e-25, "t1={end}");
    }
}

#[test]
fn integral_representation_against_bareiss() {
    let bits = 384;
    let prec = PrecisionConfig::with_bits(bits, 8).unwrap();
    let quad = QuadratureParams {
        initial_nodes: 16,
        max_nodes: 1024,
        tol: fl(bits, 1e-40),
    };
    let t = fl(bits, 0.8);
    for n in [1usize, 4, 8] {
        let q = painleve::integral_representation(n, &t, &prec, &quad).unwrap();
        let exact = oracle_log_det(n, &t, 2 * bits) - hermite_log_det(n, 2 * bits);
        assert!(abs_err(&q.value, &exact) < 1e-35, "n={n}");
    }
}

#[test]
fn jets_agree_with_trace_formula() {
    use hankel_p3::hankel::logdet_t_derivative;
    let prec = PrecisionConfig::for_order(20);
    let bits = prec.work_bits;
    for tv in [0.03, 0.9, 12.0] {
        let t = fl(bits, tv);
        let (_, aux) = compute_at(&t, 20, &prec).unwrap();
        let table = gaussian_table(&t, 20, 2, &prec).unwrap();
        for n in [1usize, 7, 20] {
            let d1 = logdet_t_derivative(&table, n, 1, &prec).unwrap();
            let d2 = logdet_t_derivative(&table, n, 2, &prec).unwrap();
            let sigma = Float::with_val(bits, &d1 * &t) * 2u32;
            // σ' = 2 d/dt ln D + 2t d²/dt² ln D
            let dsigma = (Float::with_val(bits, &d2 * &t) + &d1) * 2u32;
            assert!(rel_err(&aux.sigma[n], &sigma) < prec.tolerance().to_f64(), "t={tv} n={n}: {} vs {}", aux.sigma[n].to_f64(), sigma.to_f64());
            assert!(rel_err(&aux.dsigma[n], &dsigma) < prec.tolerance().to_f64(), "t={tv} n={n}: {} vs {}", aux.dsigma[n].to_f64(), dsigma.to_f64());
        }
    }
}
