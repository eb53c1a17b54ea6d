fn main() {
    std::process::exit(oneway::cli::run(std::env::args_os()));
}
