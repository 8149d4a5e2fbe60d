fn main() {
    std::process::exit(faceatlas::cli::main_with_args(std::env::args_os()));
}
