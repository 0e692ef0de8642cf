fn main() {
    std::process::exit(rf_spectral::cli::main_with(std::env::args_os()));
}
