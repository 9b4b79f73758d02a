fn main() {
    std::process::exit(isolab::cli::main_with_args(std::env::args_os()));
}
