fn main() {
    std::process::exit(airylab_cli::main_with_args(std::env::args_os()));
}
