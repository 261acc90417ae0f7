fn main() {
    std::process::exit(schmidt_core::cli::main_with(std::env::args_os()));
}
