use clap::Parser;

fn main() {
    let cli = match lossless_cli::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage errors are input errors (exit 1); --help and --version exit 0.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    std::process::exit(lossless_cli::execute(&cli));
}
