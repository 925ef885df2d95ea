fn main() {
    std::process::exit(vqclab_cli::run(std::env::args_os()));
}
