fn main() {
    std::process::exit(mafia_core::cli::run(std::env::args_os()));
}
