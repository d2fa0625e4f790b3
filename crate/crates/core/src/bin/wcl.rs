fn main() {
    std::process::exit(wcl::cli::main_with_args(std::env::args_os()));
}
