fn main() {
    std::process::exit(monolab::cli::main_with_args(std::env::args_os()));
}
