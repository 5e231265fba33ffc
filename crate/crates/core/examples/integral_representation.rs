// `ln D_n(t) - ln D_n(0)` as an integral of `R_n` and `R_n'`.

use hankel_p3::painleve::{integral_representation, log_det_ratio, QuadratureParams};
use hankel_p3::PrecisionConfig;

fn main() -> hankel_p3::Result<()> {
    let prec = PrecisionConfig::with_bits(256, 10)?;
    let quad = QuadratureParams {
        initial_nodes: 16,
        max_nodes: 2048,
        tol: prec.parse("1e-40")?,
    };
    let t = prec.parse("1")?;
    for n in [1, 5, 10] {
        let q = integral_representation(n, &t, &prec, &quad)?;
        let d = log_det_ratio(n, &t, &prec)?;
        println!(
            "n={n:<2} quadrature {:.30} ({} nodes)  determinant {:.30}",
            q.value.to_f64(),
            q.nodes,
            d.to_f64()
        );
    }
    Ok(())
}
