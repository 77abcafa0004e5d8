fn main() {
    std::process::exit(rfml::cli::run());
}
