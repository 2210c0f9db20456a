fn main() {
    std::process::exit(ellipseqed::cli::main_with_args(std::env::args_os()));
}
