use std::process::ExitCode;

fn main() -> ExitCode {
    match clique::cli::run(std::env::args_os()) {
        Ok(out) => {
            print!("{}", out.text);
            if out.success {
                ExitCode::SUCCESS
            } else {
                eprintln!("acceptance rules failed");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            let code = e.exit_code();
            if code == 0 {
                print!("{e}");
            } else {
                eprintln!("{e}");
            }
            ExitCode::from(code as u8)
        }
    }
}
