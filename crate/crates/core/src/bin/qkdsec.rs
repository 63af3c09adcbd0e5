fn main() {
    std::process::exit(qkd_core::cli::run(std::env::args_os()));
}
