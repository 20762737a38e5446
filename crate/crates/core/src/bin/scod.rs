fn main() {
    std::process::exit(scod::cli::main_with_args(std::env::args_os()));
}
