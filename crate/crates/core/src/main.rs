fn main() {
    std::process::exit(bohm_epr::cli::run(std::env::args_os()));
}
