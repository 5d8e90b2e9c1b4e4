fn main() {
    std::process::exit(nearmap::cli::main_with(std::env::args_os()));
}
