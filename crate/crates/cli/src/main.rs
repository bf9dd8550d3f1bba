use std::path::PathBuf;
use std::process::ExitCode;

use atomlink_cli::config::{Job, PlotJob, PlotKind, RunConfig};
use atomlink_cli::{execute, parse_file, preset, presets, write_artifacts, CliError};
use clap::{ArgGroup, Parser, Subcommand, ValueEnum};

/// Transmission spectra, storage feasibility and dark-state transfer
/// calculations for atom-loaded waveguides and resonators.
#[derive(Debug, Parser)]
#[command(name = "atomlink", version, args_conflicts_with_subcommands = true)]
#[command(group(ArgGroup::new("source").args(["config", "preset", "list_presets"])))]
struct Cli {
    /// JSON run configuration.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Bundled configuration by name.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Output path; overrides the configured one.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Worker threads (0 = automatic); overrides the configured value.
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// Print the bundled preset names and exit.
    #[arg(long)]
    list_presets: bool,
    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Render a CSV produced by this tool as an SVG plot.
    Plot {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Kind::Line)]
        kind: Kind,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        /// Horizontal-axis column.
        #[arg(long)]
        x: Option<String>,
        /// Columns to draw (line) or the vertical-axis column (contour).
        #[arg(long, value_delimiter = ',')]
        y: Vec<String>,
        /// Filled quantity for contour plots.
        #[arg(long)]
        z: Option<String>,
        #[arg(long)]
        log_x: bool,
        #[arg(long)]
        log_y: bool,
        #[arg(long)]
        log_z: bool,
        #[arg(long)]
        title: Option<String>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Line,
    Contour,
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    match (&cli.config, &cli.preset, &cli.command) {
        (Some(path), _, _) => parse_file(path),
        (None, Some(name), _) => preset(name),
        (
            None,
            None,
            Some(Cmd::Plot {
                input,
                kind,
                out,
                x,
                y,
                z,
                log_x,
                log_y,
                log_z,
                title,
            }),
        ) => {
            let mut job = PlotJob::new(
                input.clone(),
                match kind {
                    Kind::Line => PlotKind::Line,
                    Kind::Contour => PlotKind::Contour,
                },
            );
            job.x = x.clone();
            job.y = y.clone();
            job.z = z.clone();
            job.log_x = *log_x;
            job.log_y = *log_y;
            job.log_z = *log_z;
            job.title = title.clone();
            Ok(RunConfig {
                output: out.clone(),
                threads: 0,
                job: Job::Plot(job),
            })
        }
        (None, None, None) => Err(CliError::config("one of --config, --preset or a subcommand is required")),
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if cli.list_presets {
        for name in presets::names() {
            println!("{name}");
        }
        return Ok(());
    }
    let config = load(cli)?;
    let artifacts = execute(&config, cli.out.as_deref(), cli.threads)?;
    write_artifacts(&artifacts)?;
    for a in &artifacts {
        eprintln!("wrote {}", a.path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
