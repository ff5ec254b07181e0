use clap::Parser;

fn main() -> std::process::ExitCode {
    match softdd::cli::run(softdd::cli::Cli::parse()) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::FAILURE
        }
    }
}
