fn main() {
    std::process::exit(nilalg::cli::run(std::env::args_os()));
}
