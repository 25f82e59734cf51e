fn main() -> std::process::ExitCode {
    plexflow_cli::main_with(std::env::args_os())
}
