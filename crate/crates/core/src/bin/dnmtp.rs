fn main() {
    std::process::exit(dnmtp::cli::run(std::env::args_os()));
}
