fn main() {
    std::process::exit(polyclust::cli::main_with_args(std::env::args_os()));
}
