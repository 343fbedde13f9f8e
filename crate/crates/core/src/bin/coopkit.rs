fn main() {
    if let Err(e) = coopkit::cli::init_threads() {
        eprintln!("error: {e}");
        std::process::exit(2);
    }
    std::process::exit(coopkit::cli::run(std::env::args_os()));
}
