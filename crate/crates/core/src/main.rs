fn main() {
    std::process::exit(frw_acoustic::cli::main());
}
