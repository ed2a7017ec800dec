fn main() {
    std::process::exit(mapdesign::cli::run_command(std::env::args_os()));
}
