// Residual of the scaled σ-form equation for `σ_n(s/n²)` as `n` grows.

use hankel_p3::painleve::{scaled_sigma_form_residual, scaled_sigma_samples};
use hankel_p3::PrecisionConfig;

fn main() -> hankel_p3::Result<()> {
    let prec = PrecisionConfig::with_bits(512, 65)?;
    let s = [prec.parse("0.25")?, prec.parse("1")?];
    for n in [8, 16, 32, 64] {
        let samples = scaled_sigma_samples(n, &s, &prec)?;
        let res = scaled_sigma_form_residual(&samples, &prec);
        println!("n={n:<3} s=0.25: {:.3e}  s=1: {:.3e}", res[0].to_f64(), res[1].to_f64());
    }
    Ok(())
}
