fn main() {
    std::process::exit(polyflex::cli::main_with(std::env::args_os()));
}
