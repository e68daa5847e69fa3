fn main() {
    std::process::exit(msfnet::cli::run(std::env::args_os()));
}
