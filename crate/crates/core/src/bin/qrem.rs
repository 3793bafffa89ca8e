fn main() {
    std::process::exit(qrem::cli::main_with_args(std::env::args_os()));
}
