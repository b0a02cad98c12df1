fn main() {
    std::process::exit(mfentropy::cli::execute(std::env::args_os()));
}
