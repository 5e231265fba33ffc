// Residuals of the compatibility conditions and the lowering/raising
// relations at `t = 1`.

use hankel_p3::ladder::{check_ladder_relations, check_s_identities, compute_at, default_z_samples};
use hankel_p3::PrecisionConfig;

fn main() -> hankel_p3::Result<()> {
    let prec = PrecisionConfig::for_order(30);
    let t = prec.parse("1")?;
    let (rec, aux) = compute_at(&t, 30, &prec)?;
    let mut rep = check_s_identities(&aux, &rec, &prec)?;
    rep.extend(check_ladder_relations(&rec, &aux, &default_z_samples(prec.work_bits), &prec)?);
    for id in rep.identities() {
        let w = rep.max_for(&id).expect("listed identity");
        println!("{id:<70} worst 2^{:.0} at n={}", w.log2(), w.n);
    }
    println!("tolerance 2^-{}, all within: {}", prec.tolerance_bits(), rep.all_within(&prec.tolerance()));
    Ok(())
}
