fn main() {
    std::process::exit(splitqp::cli::run(std::env::args_os()));
}
