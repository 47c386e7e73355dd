fn main() {
    std::process::exit(stargauge::cli::run(std::env::args_os()));
}
