fn main() {
    std::process::exit(sectorial::cli::run(std::env::args_os()));
}
