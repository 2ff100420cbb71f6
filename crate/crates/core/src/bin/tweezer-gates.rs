fn main() {
    std::process::exit(tweezer_gates::cli::main_with_args(std::env::args_os()));
}
