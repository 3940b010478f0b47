use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use liederiv_cli::{run_bracket, run_center, run_classify, run_nilpotency, run_rank, CliError};

/// Exact classifier for nilpotent Lie algebras of derivations of
/// K(x1,...,xn), K the rationals.
#[derive(Parser)]
#[command(name = "liederiv", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify the algebra generated by the given fields and emit the JSON report
    Classify {
        /// Number of variables x1..xN
        #[arg(long)]
        nvars: usize,
        /// Generator expression, repeatable
        #[arg(long = "field", required = true)]
        fields: Vec<String>,
        /// Also write the report to this file
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Lie bracket of two fields
    Bracket {
        #[arg(long)]
        nvars: usize,
        /// The two field expressions
        #[arg(num_args = 2, required = true)]
        exprs: Vec<String>,
    },
    /// Rank of the generated algebra over the rational-function field
    Rank {
        #[arg(long)]
        nvars: usize,
        #[arg(long = "field", required = true)]
        fields: Vec<String>,
    },
    /// Basis of the center of the generated algebra
    Center {
        #[arg(long)]
        nvars: usize,
        #[arg(long = "field", required = true)]
        fields: Vec<String>,
    },
    /// Nilpotency and nilpotency class of the generated algebra
    Nilpotency {
        #[arg(long)]
        nvars: usize,
        #[arg(long = "field", required = true)]
        fields: Vec<String>,
    },
}

fn run(cmd: Cmd) -> Result<(), CliError> {
    match cmd {
        Cmd::Classify {
            nvars,
            fields,
            json,
        } => {
            let report = run_classify(&fields, nvars)?;
            let text = serde_json::to_string_pretty(&report).expect("report serializes");
            if let Some(path) = json {
                std::fs::write(&path, format!("{}\n", text)).unwrap_or_else(|e| {
                    eprintln!("error: cannot write {}: {}", path.display(), e);
                    std::process::exit(1);
                });
            }
            println!("{}", text);
        }
        Cmd::Bracket { nvars, exprs } => {
            println!("{}", run_bracket(&exprs[0], &exprs[1], nvars)?);
        }
        Cmd::Rank { nvars, fields } => {
            println!("{}", run_rank(&fields, nvars)?);
        }
        Cmd::Center { nvars, fields } => {
            for line in run_center(&fields, nvars)? {
                println!("{}", line);
            }
        }
        Cmd::Nilpotency { nvars, fields } => {
            let (nilpotent, class) = run_nilpotency(&fields, nvars)?;
            if nilpotent {
                println!("nilpotent: true");
                println!("class: {}", class);
            } else {
                println!("nilpotent: false");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {}", e.code(), e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
