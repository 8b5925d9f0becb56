fn main() {
    std::process::exit(aquasim::cli::main_with_args(std::env::args_os()));
}
