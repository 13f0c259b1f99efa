fn main() {
    std::process::exit(divkit::cli::cli_main(std::env::args_os()));
}
