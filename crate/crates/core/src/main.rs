fn main() {
    std::process::exit(wigner::cli::run());
}
