fn main() {
    std::process::exit(lieham_cli::run(std::env::args_os()));
}
