//! `simulate`: run nutrient-lattice scenarios and write CSV and SVG reports.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use nutrient_lattice::scenario::{self, presets, OutputSettings, ScenarioConfig};
use nutrient_lattice::Error;

#[derive(Parser)]
#[command(name = "simulate", version, about = "Nutrient stress lattice simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario from a JSON config or a built-in preset.
    Run(RunArgs),
    /// Run several scenarios and write a shared summary.
    Suite(SuiteArgs),
    /// List built-in presets.
    Presets,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Root seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SuiteArgs {
    #[arg(long, conflicts_with = "configs", required_unless_present = "configs")]
    preset_all: bool,
    #[arg(long, num_args = 1..)]
    configs: Vec<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug)]
struct SuiteFailed {
    failed: usize,
    validation: bool,
}

impl std::fmt::Display for SuiteFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} scenario(s) failed", self.failed)
    }
}

impl std::error::Error for SuiteFailed {}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            // Usage errors are input errors.
            return ExitCode::from(if err.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let validation = err.chain().any(|e| match e.downcast_ref::<Error>() {
                Some(e) => e.is_validation(),
                None => e.downcast_ref::<SuiteFailed>().is_some_and(|s| s.validation),
            });
            ExitCode::from(if validation { 1 } else { 2 })
        }
    }
}

fn dispatch(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Presets => {
            for (name, desc) in presets::describe() {
                println!("{name:<20} {desc}");
            }
            Ok(())
        }
        Command::Run(args) => run(args),
        Command::Suite(args) => suite(args),
    }
}

fn named_preset(name: &str) -> anyhow::Result<ScenarioConfig> {
    presets::preset(name).ok_or_else(|| {
        Error::Config {
            path: "preset".into(),
            message: format!("unknown preset `{name}`; see `simulate presets`"),
        }
        .into()
    })
}

fn run(args: RunArgs) -> anyhow::Result<()> {
    let mut config = match (&args.config, &args.preset) {
        (Some(path), _) => scenario::load_config(path)?,
        (None, Some(name)) => named_preset(name)?,
        (None, None) => bail!("either --config or --preset is required"),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(out) = args.out {
        config.outputs.dir = Some(out);
    }
    let report = scenario::run_scenario(&config)?;
    let written = scenario::emit_reports(&report, &config)?;
    let s = &report.summary;
    println!(
        "{}: mean_d {:.4}  max_d {:.4}  min_d {:.4}  cv_d {:.4}  exceed {:.3}",
        report.name, s.mean_d, s.max_d, s.min_d, s.cv_d, s.exceed_fraction
    );
    println!(
        "dominance N {:.2}%  P {:.2}%  K {:.2}%",
        100.0 * report.dominance[0],
        100.0 * report.dominance[1],
        100.0 * report.dominance[2]
    );
    match report.moran {
        Some(m) => println!("moran_i {:.4} (p = {})", m.i, m.p_value),
        None => println!("moran_i NA (constant stress map)"),
    }
    println!(
        "cvm combined {:.5} (p = {})  elapsed {:.3}s",
        report.cvm.combined.statistic,
        report.cvm.combined.p_value,
        report.duration.as_secs_f64()
    );
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn suite(args: SuiteArgs) -> anyhow::Result<()> {
    let configs = if args.preset_all {
        presets::all()
    } else {
        args.configs
            .iter()
            .map(|p| scenario::load_config(p))
            .collect::<Result<Vec<_>, _>>()?
    };
    let suite = scenario::run_suite(&configs)?;
    print!("{}", suite.comparison_table());
    let reports: Vec<_> = suite.reports().collect();
    if !reports.is_empty() {
        let settings = OutputSettings {
            dir: Some(args.out.clone()),
            ..OutputSettings::default()
        };
        let written = scenario::emit_suite(&reports, &args.out, &settings)
            .with_context(|| format!("writing reports to {}", args.out.display()))?;
        println!("wrote {} files to {}", written.len(), args.out.display());
    }
    let failures: Vec<_> = suite.failures().collect();
    if !failures.is_empty() {
        for (name, err) in &failures {
            eprintln!("{name}: {err}");
        }
        bail!(SuiteFailed {
            failed: failures.len(),
            validation: failures.iter().all(|(_, e)| e.is_validation()),
        });
    }
    Ok(())
}
