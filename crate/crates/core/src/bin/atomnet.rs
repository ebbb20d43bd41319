use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    match atomnet_core::cli::run(std::env::args_os(), &mut lock) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("atomnet: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
