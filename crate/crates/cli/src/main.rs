fn main() -> std::process::ExitCode {
    tractorforms_cli::run(std::env::args_os())
}
