fn main() {
    std::process::exit(qmpb::cli::main_with_args());
}
