fn main() {
    std::process::exit(stdpart_cli::run(std::env::args_os()));
}
