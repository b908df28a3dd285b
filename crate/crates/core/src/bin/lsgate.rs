fn main() {
    std::process::exit(lightshift::cli::run(std::env::args_os()));
}
