fn main() {
    std::process::exit(gagliardo::cli::main_from(std::env::args_os()));
}
