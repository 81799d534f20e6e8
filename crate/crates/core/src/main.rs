fn main() {
    std::process::exit(tilediff::cli::main_with_args(std::env::args_os()));
}
