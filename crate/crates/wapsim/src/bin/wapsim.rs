fn main() -> std::process::ExitCode {
    wapsim::cli::main()
}
