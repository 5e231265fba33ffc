// Exact coefficients of the double-scaling expansions and their
// optimally truncated values.

use hankel_p3::scaling::{eval_series, Regime, SeriesExpansion, SeriesName, Truncation};
use rug::Float;

fn main() -> hankel_p3::Result<()> {
    for name in [SeriesName::C1, SeriesName::Sigma1, SeriesName::Delta1] {
        for regime in [Regime::SmallS, Regime::LargeS] {
            let ser = SeriesExpansion::composite(name, regime)?;
            let terms: Vec<String> = ser
                .terms
                .iter()
                .map(|t| format!("{} s^({})", t.coefficient, t.exponent))
                .collect();
            println!("{name} {regime}: {}", terms.join(" + "));
            let s = Float::with_val(128, if regime == Regime::SmallS { 0.1 } else { 10.0 });
            let v = eval_series(&ser, &s, Truncation::Auto)?;
            println!(
                "  at s={}: {:.15} (next term {:.1e}, {} terms)",
                s.to_f64(),
                v.value.to_f64(),
                v.next_term_bound.to_f64(),
                v.terms_used
            );
        }
    }
    Ok(())
}
