// Moments of the perturbed Gaussian and Laguerre weights, with the
// `t`-derivative that comes for free from the index shift.

use hankel_p3::moments::{build_moment_table, WeightSpec};
use hankel_p3::PrecisionConfig;

fn main() -> hankel_p3::Result<()> {
    let prec = PrecisionConfig::with_bits(128, 4)?;
    let t = prec.parse("0.5")?;
    let gauss = build_moment_table(&WeightSpec::gaussian(t.clone())?, -2, 6, &prec)?;
    for k in (0..=6).step_by(2) {
        println!(
            "gaussian mu_{k} = {}  dmu/dt = {}",
            prec.format(gauss.mu(k)),
            gauss.d_mu(k).map(|d| prec.format(d)).unwrap_or_default()
        );
    }
    let lag = build_moment_table(&WeightSpec::laguerre(t, -0.5)?, 0, 3, &prec)?;
    for k in 0..=3 {
        println!("laguerre(-1/2) mu_{k} = {}", prec.format(lag.mu(k)));
    }
    Ok(())
}
