fn main() {
    std::process::exit(redlens::cli::run(std::env::args_os()));
}
