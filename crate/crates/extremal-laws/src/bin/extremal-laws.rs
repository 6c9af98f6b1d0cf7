fn main() {
    std::process::exit(extremal_laws::cli_io::run(std::env::args_os()));
}
