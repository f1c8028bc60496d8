fn main() {
    std::process::exit(psido_cli::main_with(std::env::args_os()));
}
