// The command-line front end driven in-process.

use hankel_p3::cli::{execute_args, write_rows};

fn main() -> hankel_p3::Result<()> {
    for args in [
        &["hankel-p3", "compute", "--n", "2", "--t", "1", "--quantity", "sigma", "--prec-bits", "128"][..],
        &["hankel-p3", "series", "--which", "Delta1", "--regime", "large", "--s", "10", "--prec-bits", "128"],
    ] {
        let (cfg, out) = execute_args(args.iter().copied())?;
        write_rows(&out.rows, cfg.format, std::io::stdout().lock())?;
    }
    Ok(())
}
