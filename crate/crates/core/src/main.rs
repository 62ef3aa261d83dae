fn main() {
    std::process::exit(sbpm_audit::cli::run(std::env::args_os()));
}
