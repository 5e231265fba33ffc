// Runs the three difference equations forward from their first two
// values and watches the rounding error grow.

use hankel_p3::difference::{compare_traces, error_growth, hankel_trace, run_recursion, Quantity};
use hankel_p3::ladder::compute_at;
use hankel_p3::PrecisionConfig;

fn main() -> hankel_p3::Result<()> {
    let n = 25;
    let prec = PrecisionConfig::with_bits(256, n + 1)?;
    let t = prec.parse("1")?;
    let (_, aux) = compute_at(&t, n, &prec)?;
    for q in [Quantity::SmallR, Quantity::BigR, Quantity::Sigma] {
        let rec = run_recursion(q, &t, n, &prec)?;
        let cmp = compare_traces(&rec, &hankel_trace(&aux, q), &prec.real(1e-30))?;
        let growth = error_growth(q, &t, n, &prec)?;
        println!(
            "{q}_{n} = {:.20}  max deviation {:.2e}  bits lost {:.1}",
            rec.values[n].to_f64(),
            cmp.deviations.iter().map(|d| d.to_f64()).fold(0.0, f64::max),
            growth[n]
        );
    }
    Ok(())
}
