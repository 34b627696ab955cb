fn main() {
    std::process::exit(bisector_cli::main_with_args(std::env::args_os()));
}
