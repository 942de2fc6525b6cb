fn main() {
    std::process::exit(stirlab::cli::main_from_env());
}
