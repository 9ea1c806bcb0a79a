fn main() {
    std::process::exit(skge::cli::main_with_exit_code());
}
