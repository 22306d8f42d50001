mod commands;
mod input;
mod report;

use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;

use report::{OutFormat, Report, Status};

#[derive(Parser, Debug)]
#[command(
    name = "hilb",
    version,
    about = "Exact Poisson geometry on triangular charts of planar Hilbert schemes"
)]
pub struct Cli {
    /// Worker threads.
    #[arg(long, global = true, env = "HILB_JOBS")]
    jobs: Option<usize>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    out: OutFormat,
    /// Seed for randomized property batches.
    #[arg(long, global = true, default_value_t = 2024)]
    seed: u64,
    /// Starting truncation order for power-series Smith forms.
    #[arg(long, global = true)]
    truncation: Option<u32>,
    /// Include wall-clock time in the report.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Brackets of the structure built from the anticanonical section `f`.
    Bracket {
        #[arg(long)]
        k: usize,
        #[arg(long, allow_hyphen_values = true, default_value = "1")]
        f: String,
        /// Coordinates `i,j,a,b` for the single bracket {E[i][j], E[a][b]}.
        #[arg(long)]
        pair: Option<String>,
        /// Also check the Jacobi identity.
        #[arg(long)]
        jacobi: bool,
    },
    /// Young diagram combinatorics for a partition `mu`.
    Young {
        #[arg(long)]
        mu: String,
    },
    /// A point of the chart, given by its matrix `E` or by k distinct points.
    Chart {
        /// Rows of the (k+1) x k matrix, e.g. "0,1;0,0;0,0".
        #[arg(
            long,
            allow_hyphen_values = true,
            conflicts_with = "points",
            required_unless_present = "points"
        )]
        e: Option<String>,
        /// Distinct points "x,y;x,y;...".
        #[arg(long, allow_hyphen_values = true)]
        points: Option<String>,
    },
    /// Toric degeneration data.
    Toric {
        #[arg(long)]
        k: usize,
        #[command(subcommand)]
        action: commands::ToricAction,
    },
    /// Cyclically monotone matrices and interval realizations.
    Holonomy {
        #[command(subcommand)]
        action: commands::HolonomyAction,
    },
    /// Orbit data along the divisor y = 0.
    Orbit {
        #[command(subcommand)]
        action: commands::OrbitAction,
    },
    /// Modular vector field certificates for an ideal.
    Charleaf {
        #[arg(long, allow_hyphen_values = true)]
        f: String,
        /// Generators, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        ideal: String,
        #[arg(long, default_value = "containment")]
        mode: String,
    },
    /// Gröbner basis, colength and torsion data of an ideal of Q[x, y].
    Ideal {
        #[arg(long, allow_hyphen_values = true)]
        gens: String,
    },
    /// Run the acceptance suite capped at chart size k.
    VerifyAll {
        #[arg(long)]
        k: usize,
    },
}

pub struct Settings {
    pub out: OutFormat,
    pub seed: u64,
    pub truncation: Option<u32>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: could not size worker pool: {e}");
        }
    }
    let settings = Settings {
        out: cli.out,
        seed: cli.seed,
        truncation: cli.truncation,
    };
    let start = Instant::now();
    let mut report = match commands::run(&cli.command, &settings) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            Report {
                command: commands::name(&cli.command),
                inputs: json!({}),
                outputs: json!(null),
                elapsed_ms: None,
                status: Status::Error,
                details: vec![format!("{e:#}")],
            }
        }
    };
    if cli.timing {
        report.elapsed_ms = Some(start.elapsed().as_millis());
    }
    print!("{}", report.render(cli.out));
    if cli.out == OutFormat::Json {
        println!();
    }
    ExitCode::from(report.status.exit_code())
}
