fn main() {
    std::process::exit(csa_cli::run());
}
