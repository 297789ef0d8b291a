fn main() {
    std::process::exit(paragen::cli::run(std::env::args_os()));
}
