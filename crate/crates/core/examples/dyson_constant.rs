// `ln 2/12 + 3ζ'(-1)` two ways: through the Glaisher constant and through
// Barnes G at `±1/2`.

use hankel_p3::scaling::constants::{barnes_constant, dyson_constant, ln_glaisher};
use rug::Rational;

fn main() -> hankel_p3::Result<()> {
    let bits = 256;
    let glaisher = dyson_constant(bits);
    let barnes = barnes_constant(&Rational::from((1, 2)), bits)? + barnes_constant(&Rational::from((-1, 2)), bits)?;
    println!("ln A              {:.50}", ln_glaisher(bits));
    println!("via Glaisher      {glaisher:.50}");
    println!("via Barnes G      {barnes:.50}");
    Ok(())
}
