fn main() {
    std::process::exit(cwave_cli::main_with_args(std::env::args_os()));
}
