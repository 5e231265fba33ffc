fn main() {
    std::process::exit(hankel_p3::cli::main_with_args(std::env::args_os()));
}
