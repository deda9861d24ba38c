fn main() {
    std::process::exit(rim_core::cli::main_with(std::env::args_os()));
}
