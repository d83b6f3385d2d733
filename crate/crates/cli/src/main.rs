use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = match tlchan::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match tlchan::run(cli) {
        Ok(output) => {
            for f in &output.failures {
                eprintln!("check failed: {f}");
            }
            output.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
