fn main() {
    std::process::exit(piid::cli::run(std::env::args_os()));
}
