fn main() {
    std::process::exit(anscombe::cli::main_with(std::env::args_os()));
}
