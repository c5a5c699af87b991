fn main() {
    std::process::exit(bregman_cli::main_with_args(std::env::args_os()));
}
