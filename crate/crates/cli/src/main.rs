fn main() {
    std::process::exit(flatdet_cli::cli::main_with_args(std::env::args()));
}
