// Integrates Painlevé III' for `R_1` from `t = 1` to `t = 2` and compares
// with `8/(2√2 + 1)`.

use hankel_p3::painleve::{initial_state, integrate_p3, StepControl};
use hankel_p3::PrecisionConfig;

fn main() -> hankel_p3::Result<()> {
    let prec = PrecisionConfig::with_bits(256, 2)?;
    let (t0, t1) = (prec.parse("1")?, prec.parse("2")?);
    let init = initial_state(1, &t0, &prec)?;
    let out = integrate_p3(1, &t0, &t1, &init, &prec, &StepControl::new(prec.parse("1e-25")?))?;
    let exact = prec.real(8.0) / (prec.real(8.0).sqrt() + 1u32);
    println!("R_1(2) integrated {}", prec.format(&out.state.y));
    println!("R_1(2) exact      {}", prec.format(&exact));
    println!("{}", serde_json::to_string_pretty(&out.log).expect("log serializes"));
    Ok(())
}
