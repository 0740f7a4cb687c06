fn main() {
    std::process::exit(grasswig::cli::main_with_args(std::env::args_os()));
}
