fn main() {
    std::process::exit(qltl::cli::run());
}
