fn main() {
    std::process::exit(virwhit::cli::main_with_args(std::env::args_os()));
}
