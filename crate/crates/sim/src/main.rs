use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(lilypond_sim::cli::run())
}
