fn main() -> std::process::ExitCode {
    gamma_criteria_cli::main_entry()
}
