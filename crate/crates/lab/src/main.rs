use std::process::ExitCode;

mod cli;

fn main() -> ExitCode {
    match cli::run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if e.code == 0 {
                // --help / --version go to stdout with success
                println!("{}", e.msg);
                ExitCode::SUCCESS
            } else {
                eprintln!("error: {}", e.msg);
                ExitCode::from(e.code)
            }
        }
    }
}
