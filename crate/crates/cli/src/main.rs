fn main() {
    std::process::exit(qactive_cli::main_with_args(std::env::args_os()));
}
