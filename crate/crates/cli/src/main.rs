fn main() {
    std::process::exit(rfso_cli::run(std::env::args_os()));
}
