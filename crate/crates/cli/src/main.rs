use std::process::ExitCode;

use clap::Parser;
use metadesign_cli::{parse_config, run_design, run_solve, Cli, Mode};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match parse_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(n) = cfg.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: --threads: {e}");
            return ExitCode::from(2);
        }
    }
    let mut stdout = std::io::stdout().lock();
    let result = match cfg.mode {
        Mode::Design => run_design(&cfg, &mut stdout),
        Mode::Solve => run_solve(&cfg, &mut stdout),
    };
    match result {
        Ok(files) => {
            println!("wrote {} files to {}", files.len(), cfg.output.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
