fn main() {
    std::process::exit(altmin_cli::main_with_args(std::env::args_os()));
}
