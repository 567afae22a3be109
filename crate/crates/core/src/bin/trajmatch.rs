fn main() {
    std::process::exit(trajmatch::cli::main_with_args(std::env::args_os()));
}
