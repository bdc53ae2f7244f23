fn main() {
    std::process::exit(cloneforge::cli::run(std::env::args_os()));
}
