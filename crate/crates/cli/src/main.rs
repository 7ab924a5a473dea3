fn main() {
    std::process::exit(converse_cli::run_cli(std::env::args_os()));
}
