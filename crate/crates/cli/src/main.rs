fn main() {
    std::process::exit(loem_cli::run(std::env::args_os()));
}
