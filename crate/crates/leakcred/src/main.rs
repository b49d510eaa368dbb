fn main() {
    std::process::exit(leakcred::cli::run(std::env::args_os()));
}
