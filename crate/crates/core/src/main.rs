fn main() {
    std::process::exit(sae_probe::cli::main());
}
