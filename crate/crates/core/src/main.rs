fn main() {
    std::process::exit(sncd::cli::main_with_args(std::env::args_os()));
}
