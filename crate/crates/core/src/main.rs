fn main() {
    std::process::exit(pottslab::cli::run(std::env::args_os()));
}
