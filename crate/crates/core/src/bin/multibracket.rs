fn main() {
    std::process::exit(multibracket::cli::main_with_args(std::env::args_os()));
}
