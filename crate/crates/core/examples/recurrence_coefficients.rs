// Norms, recurrence coefficients and log-determinants for a few `t`.

use hankel_p3::hankel::{compute_recurrence, gaussian_table};
use hankel_p3::PrecisionConfig;

fn main() -> hankel_p3::Result<()> {
    let n_max = 8;
    let prec = PrecisionConfig::for_order(n_max);
    for tv in ["0", "0.1", "1", "10"] {
        let t = prec.parse(tv)?;
        let table = gaussian_table(&t, n_max, 0, &prec)?;
        let rec = compute_recurrence(&table, n_max, &prec)?;
        println!("t = {tv}");
        for n in 1..=n_max {
            println!(
                "  n={n:<2} beta = {:<24.18} ln D = {:.18}",
                rec.beta[n].to_f64(),
                rec.log_d[n].to_f64()
            );
        }
    }
    Ok(())
}
