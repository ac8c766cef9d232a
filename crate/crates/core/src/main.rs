fn main() {
    std::process::exit(abeta_prion::cli::run(std::env::args_os()));
}
