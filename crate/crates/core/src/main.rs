fn main() {
    std::process::exit(bec_interface::cli::run(std::env::args_os()));
}
