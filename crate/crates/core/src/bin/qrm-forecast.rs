fn main() {
    std::process::exit(qrm_forecast::cli::run(std::env::args_os()));
}
