fn main() {
    std::process::exit(zrplab::cli::main());
}
