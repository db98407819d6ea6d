fn main() {
    std::process::exit(awgauss::cli::main_exit_code());
}
