fn main() {
    std::process::exit(lz_gates::cli::main_from_env());
}
