fn main() {
    std::process::exit(spaceform::cli::run_from_args());
}
