fn main() {
    std::process::exit(gapcount::cli::run(std::env::args_os()));
}
