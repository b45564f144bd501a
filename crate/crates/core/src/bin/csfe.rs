fn main() {
    std::process::exit(csfe::cli::main_with_args(std::env::args_os()));
}
