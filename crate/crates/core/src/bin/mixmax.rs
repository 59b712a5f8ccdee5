fn main() {
    std::process::exit(mixmax::cli::main_with_args(std::env::args_os()));
}
