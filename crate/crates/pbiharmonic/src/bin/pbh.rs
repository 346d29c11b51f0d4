fn main() {
    std::process::exit(pbiharmonic::cli::run());
}
