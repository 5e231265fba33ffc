// Finite-n samples of the scaled quantities against their asymptotic
// series as `n` doubles.

use hankel_p3::scaling::{convergence_report, ScaledQuantity};
use hankel_p3::PrecisionConfig;

fn main() -> hankel_p3::Result<()> {
    let ns = [16, 32, 64];
    let prec = PrecisionConfig::with_bits(768, 2 * 64 + 1)?;
    for (q, s) in [
        (ScaledQuantity::C1, "0.5"),
        (ScaledQuantity::Sigma1, "1"),
        (ScaledQuantity::Delta1, "10"),
    ] {
        let rep = convergence_report(q, &prec.parse(s)?, &ns, &prec)?;
        println!("{q} at s={s}: series {:.8} ({} regime)", rep.series.value.to_f64(), rep.regime);
        for (x, d) in rep.samples.iter().zip(&rep.deviations) {
            println!("  n={:<4} sample {:.8}  deviation {:.3e}", x.n, x.comparable().to_f64(), d.to_f64());
        }
        println!("  fit {:?}", rep.fit);
    }
    Ok(())
}
