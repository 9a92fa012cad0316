fn main() {
    std::process::exit(pairgen::cli::main_with_args(std::env::args_os()));
}
