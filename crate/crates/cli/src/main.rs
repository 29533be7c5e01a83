use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let out = ramsey_cli::run(std::env::args_os());
    if let Some(msg) = &out.message {
        if out.code == 0 {
            print!("{msg}");
        } else {
            eprintln!("{}", msg.trim_end());
        }
    }
    if let Some(report) = &out.report {
        let json = report.to_json() + "\n";
        let written = match &out.output {
            Some(path) => std::fs::write(path, json),
            None => std::io::stdout().write_all(json.as_bytes()),
        };
        if let Err(e) = written {
            eprintln!("error: cannot write report: {e}");
            return ExitCode::from(74);
        }
    }
    ExitCode::from(out.code as u8)
}
