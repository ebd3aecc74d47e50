fn main() {
    std::process::exit(loopforge_cli::cli::main_with_args(std::env::args()));
}
