fn main() {
    std::process::exit(btq::cli::run(std::env::args_os()));
}
