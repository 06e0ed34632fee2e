use std::process::ExitCode;

use linopt::cli::{parse_config, run, ConfigError, EXIT_FAILURE, EXIT_USAGE, THREADS_ENV};

fn main() -> ExitCode {
    env_logger::init();

    if let Ok(value) = std::env::var(THREADS_ENV) {
        match value.parse::<usize>() {
            Ok(threads) if threads > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global()
                {
                    eprintln!("cannot configure {threads} threads: {e}");
                    return ExitCode::from(EXIT_FAILURE as u8);
                }
            }
            _ => {
                eprintln!("{THREADS_ENV} must be a positive integer, got {value:?}");
                return ExitCode::from(EXIT_USAGE as u8);
            }
        }
    }

    let config = match parse_config(std::env::args_os()) {
        Ok(c) => c,
        Err(err) => {
            match &err {
                ConfigError::Usage(e) => {
                    let _ = e.print();
                }
                ConfigError::Violations(_) => eprint!("{err}"),
            }
            return ExitCode::from(err.exit_code() as u8);
        }
    };

    match run(&config) {
        Ok(outcome) => {
            if config.output_path.is_some() {
                println!("{}", outcome.summary);
            } else {
                print!("{}", outcome.artifact);
                eprintln!("{}", outcome.summary);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
