use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pilotline::io::{
    exit_code, list_presets, resolve_scenario, run_scenario, OutputFormat, Scenario, EXIT_CONFIG,
};

#[derive(Parser)]
#[command(
    name = "pilotline",
    version,
    about = "Pilot-wave spectral line relaxation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset or a TOML scenario file.
    Run {
        /// Preset name (see `presets`) or path to a scenario file.
        scenario: String,
        /// Master seed of the initial ensemble.
        #[arg(long)]
        seed: Option<u64>,
        /// Number of ensemble points.
        #[arg(long)]
        points: Option<usize>,
        /// Output directory (default `out/<name>`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; changes wall time only, never the results.
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
        format: String,
    },
    /// List the available presets.
    Presets,
}

fn fail(code: i32, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Presets => {
            for (name, description) in list_presets() {
                println!("{name:<14}{description}");
            }
            ExitCode::SUCCESS
        }
        Command::Run {
            scenario,
            seed,
            points,
            out,
            threads,
            format,
        } => {
            let mut scenario = match resolve_scenario(&scenario) {
                Ok(s) => s,
                Err(e) => return fail(exit_code(&e), e),
            };
            match (&mut scenario, seed, points) {
                (Scenario::Ensemble(c), _, _) => {
                    if let Some(s) = seed {
                        c.seed = s;
                    }
                    if let Some(n) = points {
                        c.n_points = n;
                    }
                }
                (Scenario::Contours(_), None, None) => {}
                (Scenario::Contours(_), _, _) => {
                    return fail(
                        EXIT_CONFIG,
                        "--seed and --points do not apply to contour scenarios",
                    )
                }
            }
            if let Some(dir) = out {
                scenario.set_output_dir(dir);
            }
            let format: OutputFormat = format.parse().expect("clap restricts the format values");

            let pool = match rayon::ThreadPoolBuilder::new()
                .num_threads(threads.unwrap_or(0))
                .build()
            {
                Ok(p) => p,
                Err(e) => return fail(EXIT_CONFIG, format!("thread pool: {e}")),
            };
            match pool.install(|| run_scenario(&scenario, format)) {
                Ok(report) => {
                    println!(
                        "{}: wrote {} in {:.2} s",
                        report.manifest.preset,
                        report.output_dir.display(),
                        report.manifest.wall_time_seconds
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => fail(exit_code(&e), e),
            }
        }
    }
}
