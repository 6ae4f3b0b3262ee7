fn main() {
    std::process::exit(deep_ritz::cli::run(std::env::args_os()));
}
