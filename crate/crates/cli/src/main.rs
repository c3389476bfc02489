fn main() {
    std::process::exit(qmaxent_cli::run(std::env::args_os()));
}
