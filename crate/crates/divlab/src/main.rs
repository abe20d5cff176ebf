fn main() {
    std::process::exit(divlab::cli::run(std::env::args_os()));
}
