fn main() {
    std::process::exit(nsstab::cli::main_with_args(std::env::args_os()));
}
