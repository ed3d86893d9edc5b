fn main() {
    std::process::exit(decorated_cli::run(std::env::args_os()));
}
