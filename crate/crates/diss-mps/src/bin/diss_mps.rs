fn main() {
    std::process::exit(diss_mps::cli::run(std::env::args_os()));
}
