fn main() {
    std::process::exit(waringmat::cli::main_exit_code());
}
