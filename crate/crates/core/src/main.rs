fn main() {
    std::process::exit(cumdiff::cli::run_cli(std::env::args_os()));
}
