fn main() -> std::process::ExitCode {
    diffee::cli::main()
}
