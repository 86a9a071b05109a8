fn main() {
    std::process::exit(oddeven_cli::run(std::env::args_os()));
}
