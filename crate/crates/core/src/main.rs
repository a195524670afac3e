fn main() {
    expectation_atlas::cli::init_logging();
    let code = expectation_atlas::cli::run(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
