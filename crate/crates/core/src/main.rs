fn main() {
    std::process::exit(abflux::cli::main());
}
