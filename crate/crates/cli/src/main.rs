//! `rovib`: level tables, transition moments, polarizabilities, linewidths,
//! magic frequencies and mass-ratio sensitivities from a molecule config.

mod commands;
mod error;
mod manifest;
mod output;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rovib::radial::LevelSelector;

use crate::error::{CliError, CliResult};
use crate::manifest::{sidecar, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "rovib", version, about = "Rovibrational structure and light-shift calculations for diatomic molecules")]
pub struct Cli {
    /// Worker threads (defaults to all cores); results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Widths {
    Zero,
    Decay,
}

#[derive(Debug, Args)]
pub struct ConfigArg {
    #[arg(long)]
    config: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bound levels of one channel.
    Levels {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        channel: String,
        #[arg(long = "J", default_value_t = 0)]
        j: u32,
        /// Label levels by v counted from dissociation (-1 = least bound).
        #[arg(long)]
        from_top: bool,
    },
    /// Reduced transition dipoles and Franck-Condon factors to the ground channel.
    Tdm {
        #[command(flatten)]
        config: ConfigArg,
        /// Excited channel.
        #[arg(long)]
        channel: String,
        #[arg(long = "Jp", default_value_t = 1)]
        jp: u32,
        #[arg(long = "J", default_value_t = 0)]
        j: u32,
        #[arg(long, value_parser = parse_selector)]
        excited: Option<LevelSelector>,
        #[arg(long, value_parser = parse_selector)]
        ground: Option<LevelSelector>,
    },
    /// Two-photon pathways between J=0 ground levels through J'=1 intermediates.
    Raman {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, value_parser = parse_selector)]
        initial: LevelSelector,
        #[arg(long = "final", value_parser = parse_selector)]
        final_level: LevelSelector,
        /// Restrict intermediates to one excited channel.
        #[arg(long)]
        channel: Option<String>,
        /// Sort by descending |d_i d_f|.
        #[arg(long)]
        rank: bool,
        #[arg(long)]
        top: Option<usize>,
    },
    /// Dynamic polarizability scan of ground levels.
    Polar {
        #[command(flatten)]
        config: ConfigArg,
        /// Comma-separated selectors, e.g. `v=-3,v=27`.
        #[arg(long, value_parser = parse_selectors)]
        levels: Selectors,
        #[arg(long = "J", default_value_t = 0)]
        j: u32,
        /// Frequency window `a:b` in cm^-1.
        #[arg(long, value_parser = parse_window)]
        window: (f64, f64),
        #[arg(long, default_value_t = rovib::response::DEFAULT_SCAN_STEP)]
        step: f64,
        #[arg(long, value_enum, default_value_t = Widths::Decay)]
        widths: Widths,
        #[arg(long = "M", default_value_t = 0, allow_hyphen_values = true)]
        m: i32,
        /// Spherical polarization component (-1, 0, 1).
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        eps: i32,
    },
    /// Einstein A and linewidth of every level of an excited channel.
    Linewidths {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        channel: String,
        #[arg(long = "Jp", default_value_t = 1)]
        jp: u32,
    },
    /// Frequencies where two ground levels have equal polarizability.
    Magic {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, value_parser = parse_selector)]
        a: LevelSelector,
        #[arg(long, value_parser = parse_selector)]
        b: LevelSelector,
        #[arg(long = "J", default_value_t = 0)]
        j: u32,
        #[arg(long, value_parser = parse_window)]
        window: (f64, f64),
        #[arg(long, default_value_t = 0.1)]
        step: f64,
        #[arg(long, default_value_t = rovib::metrology::DEFAULT_EXCLUSION)]
        exclusion: f64,
        #[arg(long, value_enum, default_value_t = Widths::Decay)]
        widths: Widths,
    },
    /// Mass-ratio sensitivities of levels or of one interval.
    Sensitivity {
        #[command(flatten)]
        config: ConfigArg,
        /// Defaults to the ground channel.
        #[arg(long)]
        channel: Option<String>,
        #[arg(long = "J", default_value_t = 0)]
        j: u32,
        /// Two selectors `a,b`; reports ν, dν/dlnμ and κ of b − a.
        #[arg(long, value_parser = parse_selectors)]
        pair: Option<Selectors>,
        #[arg(long, default_value_t = rovib::metrology::DEFAULT_REL_STEP)]
        rel_step: f64,
    },
    /// Fractional frequency instability from probe linewidth and SNR.
    Budget {
        #[arg(long)]
        linewidth_hz: f64,
        #[arg(long)]
        snr: f64,
        #[arg(long, required_unless_present = "nu_cm1", conflicts_with = "nu_cm1")]
        nu_hz: Option<f64>,
        #[arg(long)]
        nu_cm1: Option<f64>,
    },
    /// Re-run a command from its manifest.
    Replay { manifest: PathBuf },
}

fn parse_selector(s: &str) -> Result<LevelSelector, String> {
    s.parse().map_err(|e: rovib::Error| e.to_string())
}

/// Comma-separated level selectors.
#[derive(Debug, Clone)]
pub struct Selectors(pub Vec<LevelSelector>);

fn parse_selectors(s: &str) -> Result<Selectors, String> {
    s.split(',').map(parse_selector).collect::<Result<_, _>>().map(Selectors)
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("window `{s}` must be `a:b`"))?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number"));
    Ok((num(a)?, num(b)?))
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Levels { .. } => "levels",
            Command::Tdm { .. } => "tdm",
            Command::Raman { .. } => "raman",
            Command::Polar { .. } => "polar",
            Command::Linewidths { .. } => "linewidths",
            Command::Magic { .. } => "magic",
            Command::Sensitivity { .. } => "sensitivity",
            Command::Budget { .. } => "budget",
            Command::Replay { .. } => "replay",
        }
    }

    fn config(&self) -> Option<&Path> {
        match self {
            Command::Levels { config, .. }
            | Command::Tdm { config, .. }
            | Command::Raman { config, .. }
            | Command::Polar { config, .. }
            | Command::Linewidths { config, .. }
            | Command::Magic { config, .. }
            | Command::Sensitivity { config, .. } => Some(&config.config),
            Command::Budget { .. } | Command::Replay { .. } => None,
        }
    }
}

fn write_out(out: Option<&Path>, body: &str, manifest: &RunManifest, extras: &[(String, serde_json::Value)]) -> CliResult<()> {
    let manifest_json = manifest.to_json()?;
    match out {
        Some(path) => {
            std::fs::write(path, body)?;
            std::fs::write(sidecar(path, ".manifest.json"), manifest_json + "\n")?;
            for (suffix, value) in extras {
                std::fs::write(sidecar(path, &format!(".{suffix}.json")), serde_json::to_string_pretty(value)? + "\n")?;
            }
        }
        None => {
            std::io::stdout().lock().write_all(body.as_bytes())?;
            let mut err = std::io::stderr().lock();
            writeln!(err, "{manifest_json}")?;
            for (suffix, value) in extras {
                writeln!(err, "{suffix}: {}", serde_json::to_string(value)?)?;
            }
        }
    }
    Ok(())
}

fn execute(cli: &Cli, args: Vec<String>) -> CliResult<()> {
    let manifest = RunManifest::new(cli.command.config(), cli.command.name(), args)?;
    let output = commands::run(&cli.command)?;
    let body = match cli.format {
        Format::Csv => output.table.to_csv()?,
        Format::Json => serde_json::to_string_pretty(&output.json)? + "\n",
    };
    write_out(cli.out.as_deref(), &body, &manifest, &output.extras)
}

/// Resolves `replay` into the recorded command line, with this run's
/// `--out` / `--threads` taking precedence.
fn resolve(cli: Cli, args: Vec<String>) -> CliResult<(Cli, Vec<String>)> {
    let Command::Replay { manifest } = &cli.command else { return Ok((cli, args)) };
    let m = RunManifest::load(manifest)?;
    m.check_input()?;
    let mut recorded = m.args.clone();
    if !m.config.is_empty() {
        recorded.retain_with_value("--config");
        recorded.extend(["--config".to_string(), m.config.clone()]);
    }
    let mut inner = Cli::try_parse_from(std::iter::once("rovib".to_string()).chain(recorded.iter().cloned()))
        .map_err(|e| CliError::Usage(format!("manifest arguments do not parse: {e}")))?;
    if matches!(inner.command, Command::Replay { .. }) {
        return Err(CliError::Usage("a manifest cannot replay another replay".into()));
    }
    if let Some(out) = cli.out {
        recorded.retain_with_value("--out");
        recorded.extend(["--out".to_string(), out.display().to_string()]);
        inner.out = Some(out);
    }
    if cli.threads.is_some() {
        inner.threads = cli.threads;
    }
    Ok((inner, recorded))
}

trait StripFlag {
    fn retain_with_value(&mut self, flag: &str);
}

impl StripFlag for Vec<String> {
    /// Drops `flag <value>` and `flag=<value>` occurrences.
    fn retain_with_value(&mut self, flag: &str) {
        let mut out = Vec::with_capacity(self.len());
        let mut skip = false;
        for a in self.drain(..) {
            if skip {
                skip = false;
            } else if a == flag {
                skip = true;
            } else if !a.starts_with(&format!("{flag}=")) {
                out.push(a);
            }
        }
        *self = out;
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = resolve(cli, args).and_then(|(cli, args)| {
        if let Some(n) = cli.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::Usage(format!("cannot set up {n} threads: {e}")))?;
        }
        execute(&cli, args)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
