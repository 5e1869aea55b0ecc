fn main() {
    std::process::exit(eventbasis_cli::main_with_args(std::env::args_os()));
}
