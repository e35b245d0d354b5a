fn main() {
    let code = catalyq::cli::dispatch(std::env::args());
    std::process::exit(code);
}
