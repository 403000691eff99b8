fn main() {
    std::process::exit(waring::cli::run(std::env::args_os()));
}
