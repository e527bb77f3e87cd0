fn main() {
    std::process::exit(pgarch::cli::dispatch(std::env::args().collect()));
}
