fn main() {
    let argv: Vec<String> = std::env::args().collect();
    let config = match auxinfo::cli::parse_args(argv) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    std::process::exit(auxinfo::cli::dispatch(config));
}
