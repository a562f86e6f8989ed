fn main() {
    std::process::exit(qfourier_cli::run(std::env::args_os()));
}
