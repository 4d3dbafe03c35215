fn main() {
    std::process::exit(artiforest::cli::run(std::env::args_os()));
}
