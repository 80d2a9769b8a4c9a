fn main() {
    std::process::exit(qtsvm_cli::run(std::env::args_os()));
}
