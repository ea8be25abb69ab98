fn main() {
    std::process::exit(protective_sim::cli::main_with_args(std::env::args_os()));
}
