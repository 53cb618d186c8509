fn main() -> std::process::ExitCode {
    prosa_sim::cli::main()
}
