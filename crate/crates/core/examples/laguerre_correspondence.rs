// The Gaussian determinant as a product of two Laguerre determinants
// with exponents `∓1/2`.

use hankel_p3::scaling::{h_equation_residual, laguerre_correspondence_check};
use hankel_p3::PrecisionConfig;

fn main() -> hankel_p3::Result<()> {
    let prec = PrecisionConfig::for_order(42);
    let t = prec.parse("0.7")?;
    let rep = laguerre_correspondence_check(&t, 20, &prec)?;
    for id in rep.identities() {
        let w = rep.max_for(&id).expect("listed identity");
        println!("{id:<22} worst 2^{:.0}", w.log2());
    }
    for alpha in [-0.5, 0.5] {
        let worst = (0..=20)
            .map(|n| h_equation_residual(n, alpha, std::slice::from_ref(&t), &prec).map(|r| r[0].to_f64()))
            .collect::<hankel_p3::Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        println!("H equation alpha={alpha:<5} worst {worst:.1e}");
    }
    Ok(())
}
