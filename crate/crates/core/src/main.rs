fn main() {
    std::process::exit(smoothkm::cli::run_cli(std::env::args_os()));
}
