fn main() {
    std::process::exit(billiard_core::cli::run(std::env::args_os()));
}
