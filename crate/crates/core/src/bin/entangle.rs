fn main() {
    std::process::exit(entangle_core::cli::run(std::env::args_os()));
}
