fn main() {
    std::process::exit(cams::cli::run(std::env::args_os()));
}
