fn main() {
    std::process::exit(monosplit::cli::run_from(std::env::args_os()));
}
