use std::process::ExitCode;

use ringvault_cli::prompt::Terminal;

fn main() -> ExitCode {
    let code = ringvault_cli::run(std::env::args_os(), &mut std::io::stdout().lock(), &mut Terminal);
    ExitCode::from(code)
}
