fn main() {
    std::process::exit(gnair_core::cli::main_with_args(std::env::args_os()));
}
