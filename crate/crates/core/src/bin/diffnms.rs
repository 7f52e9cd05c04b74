fn main() -> std::process::ExitCode {
    diffnms::harness::cli::main()
}
