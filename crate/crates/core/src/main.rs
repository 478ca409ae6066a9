fn main() {
    let args: Vec<String> = std::env::args().collect();
    std::process::exit(casimir_core::cli::run(&args));
}
