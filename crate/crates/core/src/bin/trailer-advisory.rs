fn main() -> std::process::ExitCode {
    trailer_advisory::cli::main()
}
