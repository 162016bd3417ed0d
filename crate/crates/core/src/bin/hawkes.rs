use std::io::{self, Write};
use std::process::ExitCode;

fn main() -> ExitCode {
    if let Err(e) = hawkes_core::cli::configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let code = hawkes_core::cli::main_with(std::env::args_os(), &mut out, &mut io::stderr());
    let _ = out.flush();
    ExitCode::from(code as u8)
}
