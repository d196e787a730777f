fn main() {
    std::process::exit(qgsw_cli::run(std::env::args_os()));
}
