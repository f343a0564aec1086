use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rydberg_cli::commands::{self, Command};
use rydberg_cli::config::{Config, ConfigError, Origin};
use rydberg_cli::presets;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "rydberg", version, about = "Rydberg excitation blockade: expansion, saturation, correlation and exact dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Flat `key = value` scenario file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Named parameter set applied before the config file.
    #[arg(long, global = true, value_name = "NAME")]
    preset: Option<String>,
    /// Override one key; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// γ for square and Gaussian pulses and each interaction kernel.
    GammaTable,
    /// Excitation fraction against I/I_sat: model curve, clamp and series.
    Pexc,
    /// Pair correlation P(R) for one or more pulse variants.
    Correlation,
    /// Suppression factor and saturated fraction at one density.
    Saturation,
    /// Saturated fraction from zero density up to `rho`.
    DensitySweep,
    /// Exact many-body propagation of a small cluster.
    Oracle,
    /// Sampled against density-averaged fourth-order term.
    McValidate,
    /// Resolve and check the configuration without computing.
    Validate,
}

impl Cmd {
    fn target(&self) -> Option<Command> {
        Some(match self {
            Cmd::GammaTable => Command::GammaTable,
            Cmd::Pexc => Command::Pexc,
            Cmd::Correlation => Command::Correlation,
            Cmd::Saturation => Command::Saturation,
            Cmd::DensitySweep => Command::DensitySweep,
            Cmd::Oracle => Command::Oracle,
            Cmd::McValidate => Command::McValidate,
            Cmd::Validate => return None,
        })
    }
}

fn load(cli: &Cli) -> Result<Config, ConfigError> {
    let mut cfg = Config::default();
    if let Some(name) = &cli.preset {
        presets::apply(&mut cfg, name)?;
    }
    if let Some(path) = &cli.config {
        let shown = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            origin: None,
            field: Some("--config".into()),
            message: format!("cannot read {shown}: {e}"),
        })?;
        cfg.merge_text(&text, &shown)?;
    }
    for s in &cli.set {
        cfg.merge_flag(s)?;
    }
    if let Some(seed) = cli.seed {
        cfg.set("seed", &seed.to_string(), Origin::Flag)?;
    }
    if let Some(w) = cli.workers {
        cfg.set("workers", &w.to_string(), Origin::Flag)?;
    }
    Ok(cfg)
}

fn target(cli: &Cli, cfg: &Config) -> Result<Command, ConfigError> {
    if let Some(c) = cli.command.target() {
        return Ok(c);
    }
    let name: String = cfg.require("command", "to validate (set it or use a preset)")?;
    name.parse().map_err(|e: String| cfg.invalid("command", e))
}

fn write(cli: &Cli, text: &str) -> Result<(), String> {
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let scenario = match target(&cli, &cfg).and_then(|cmd| Ok((cmd, commands::resolve(&cfg, cmd)?))) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    // Echo the command actually run in every header.
    let _ = cfg.set("command", scenario.0.name(), Origin::Flag);
    if matches!(cli.command, Cmd::Validate) {
        let mut text = format!("# rydberg {}\n# command = {}\n", rydberg_cli::VERSION, scenario.0);
        for line in cfg.resolved_lines() {
            text.push_str(&line);
            text.push('\n');
        }
        return match write(&cli, &text) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("{e}");
                ExitCode::FAILURE
            }
        };
    }
    let workers: usize = cfg.value("workers").unwrap_or(0);
    if workers > 0 {
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global();
    }
    let report = match commands::run(&scenario.1) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("numerical error: {e}");
            return ExitCode::from(EXIT_NUMERICAL);
        }
    };
    let text = match cli.format {
        Format::Csv => report.to_csv(&cfg),
        Format::Json => report.to_json(&cfg),
    };
    match write(&cli, &text) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::FAILURE
        }
    }
}
