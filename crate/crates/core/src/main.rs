fn main() {
    std::process::exit(helstrom_flow::cli::run(std::env::args_os()));
}
