fn main() {
    std::process::exit(monocert::cli::run(std::env::args().skip(1)));
}
