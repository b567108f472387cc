fn main() {
    std::process::exit(gocoexist::cli::cli_entry(std::env::args_os()));
}
