fn main() {
    std::process::exit(taptrap_cli::run(std::env::args_os()));
}
