//! Command-line front end: configuration, execution and artifact output.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{run, RunError, Summary};
pub use config::{parse_config, ConfigError, ParseOutcome, RunConfig};

/// Exit status for a numerical failure.
pub const EXIT_NUMERICAL: i32 = 1;
/// Exit status for a configuration error.
pub const EXIT_CONFIG: i32 = 2;

/// Parses `args` (program name first), runs the command and prints the
/// summary; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let config = match parse_config(args) {
        Ok(c) => c,
        Err(ParseOutcome::Clap(e)) => {
            let _ = e.print();
            return e.exit_code();
        }
        Err(ParseOutcome::Invalid(e)) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    match run(&config) {
        Ok(summary) => {
            println!("{}", summary.line);
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_NUMERICAL
        }
    }
}
