fn main() {
    std::process::exit(spectral_variance::cli::run(std::env::args_os()));
}
