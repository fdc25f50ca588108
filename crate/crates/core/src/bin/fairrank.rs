fn main() {
    let code = fairrank::cli::main(std::env::args_os());
    std::process::exit(code);
}
