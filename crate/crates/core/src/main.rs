fn main() {
    std::process::exit(sda_core::cli::main());
}
