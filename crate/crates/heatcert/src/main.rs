use std::path::Path;
use std::process::ExitCode;

use heatcert::cli::{compare, run, RunConfig, RunStatus};

const USAGE: &str = "usage:
  heatcert run <config-path>      execute a verification run
  heatcert compare <dirA> <dirB>  compare two completed run directories

exit codes: 0 verified to T, 2 verification stopped early, 1 usage/config/io error";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match args.first().map(String::as_str) {
        Some("run") if args.len() == 2 => {
            let config = match RunConfig::load(Path::new(&args[1])) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            match run(&config) {
                Ok(out) => {
                    println!(
                        "mode={} last_verified_t={} target={} steps={}",
                        out.run.mode.name(),
                        out.run.last_verified_t,
                        out.run.target_t,
                        out.run.certificates.len()
                    );
                    match out.status {
                        RunStatus::Complete => ExitCode::SUCCESS,
                        RunStatus::StoppedEarly => ExitCode::from(2),
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Some("compare") if args.len() == 3 => {
            match compare(Path::new(&args[1]), Path::new(&args[2])) {
                Ok(report) => {
                    println!("{}", report.further);
                    print!("{}", report.table);
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
        _ => {
            eprintln!("{USAGE}");
            ExitCode::from(1)
        }
    }
}
