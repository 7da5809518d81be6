fn main() {
    std::process::exit(ratebargain::cli::main_with_args(std::env::args_os()));
}
