fn main() {
    std::process::exit(crossconv::cli::main());
}
