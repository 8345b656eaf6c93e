fn main() {
    std::process::exit(mint_cli::main_with(std::env::args().skip(1).collect()));
}
