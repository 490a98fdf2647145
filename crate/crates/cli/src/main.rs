//! `fpstate`: build fermionic projector states on ultrastatic slabs and run
//! the spectral diagnostics from the command line.
//!
//! Every artifact carries a header with the tool version, config hash and
//! seed. Failures print a single JSON error record on stderr and exit 1.

mod commands;
mod config;
mod emit;
mod presets;
mod setup;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use fpstate::gamma::C64;

use crate::commands::Check;
use crate::config::{ConfigError, RunConfig};
use crate::emit::{Emitter, Header};
use crate::presets::UnknownPreset;
use crate::setup::Setup;

#[derive(Parser, Debug)]
#[command(
    name = "fpstate",
    version,
    about = "Fermionic projector state experiments"
)]
struct Cli {
    /// Flat `key = value` config file; defaults apply to missing keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set cutoff=40`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    /// Output directory; beats FPSTATE_OUT_DIR and `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Synthetic spectrum file (`# mass=` header, `z lambda tag` lines).
    #[arg(long, global = true)]
    spectrum_file: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Emit the truncated spectrum.
    Spectrum,
    /// Build and dump an FP state.
    Fpstate {
        #[command(subcommand)]
        action: FpstateAction,
    },
    Diagnose {
        #[command(subcommand)]
        action: DiagnoseAction,
    },
    Kernel {
        #[command(subcommand)]
        action: KernelAction,
    },
    Oracle {
        #[command(subcommand)]
        action: OracleAction,
    },
    /// Run a fixed experiment bundle: unsoftened-scan, softened-convergence or fluctuations.
    Replicate { preset: String },
    /// Spectrum, state dump and series reports in one pass.
    Run,
}

#[derive(Subcommand, Debug)]
enum FpstateAction {
    Build,
}

#[derive(Subcommand, Debug)]
enum DiagnoseAction {
    /// Partial sums of `lambda^p sin^2 theta` for each order in `series.orders`.
    Series {
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<u32>>,
    },
    /// Slab half-width scan over the `scan.*` grid.
    Scan,
    KSpectrum {
        /// Sub-slab `a',b'`; defaults to the middle half of the slab.
        #[arg(long)]
        sub: Option<String>,
    },
    Fluctuations {
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<u32>>,
        /// `re,im` of the smearing transform at zero.
        #[arg(long, default_value = "1,0")]
        hhat0: String,
    },
}

#[derive(Subcommand, Debug)]
enum KernelAction {
    /// Truncated difference kernel at point pairs `t x1 x2 x3 t' x1' x2' x3'`.
    Eval {
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        modes: Option<usize>,
    },
    /// Closed-form norms against subsampled grid quadrature.
    Norms,
}

#[derive(Subcommand, Debug)]
enum OracleAction {
    Check {
        #[arg(long, default_value = "1,2,3")]
        modes: String,
        /// State dump; built from the config when absent.
        #[arg(long)]
        state: Option<PathBuf>,
    },
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let text = match &cli.config {
        Some(p) => fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        None => String::new(),
    };
    let mut map = config::parse_pairs(&text)?;
    let mut extra = cli.overrides.join("\n");
    if let Some(p) = &cli.spectrum_file {
        extra.push_str(&format!("\nspectrum.file = {}", p.display()));
    }
    for (k, v) in config::parse_pairs(&extra)? {
        map.insert(k, v);
    }
    Ok(RunConfig::from_map(&map)?)
}

fn command_name(c: &Command) -> String {
    match c {
        Command::Spectrum => "spectrum".into(),
        Command::Fpstate { .. } => "fpstate build".into(),
        Command::Diagnose { action } => match action {
            DiagnoseAction::Series { .. } => "diagnose series".into(),
            DiagnoseAction::Scan => "diagnose scan".into(),
            DiagnoseAction::KSpectrum { .. } => "diagnose k-spectrum".into(),
            DiagnoseAction::Fluctuations { .. } => "diagnose fluctuations".into(),
        },
        Command::Kernel { action } => match action {
            KernelAction::Eval { .. } => "kernel eval".into(),
            KernelAction::Norms => "kernel norms".into(),
        },
        Command::Oracle { .. } => "oracle check".into(),
        Command::Replicate { preset } => format!("replicate {preset}"),
        Command::Run => "run".into(),
    }
}

fn finish(out: &Emitter, checks: &[Check]) -> ExitCode {
    for path in out.written() {
        println!("wrote {}", path.display());
    }
    for c in checks {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        println!(
            "{status} {} = {:e} (tolerance {:e})",
            c.name, c.value, c.tolerance
        );
    }
    if checks.iter().all(Check::passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn execute(cli: Cli) -> Result<ExitCode> {
    if let Command::Replicate { preset } = &cli.command {
        let seed = load_config(&cli)?.seed;
        let (checks, out) = presets::replicate(preset, seed, cli.out.as_deref())?;
        return Ok(finish(&out, &checks));
    }
    let mut config = load_config(&cli)?;
    match &cli.command {
        Command::Diagnose {
            action: DiagnoseAction::Series { p: Some(p) },
        } => config.series_orders = p.clone(),
        Command::Diagnose {
            action: DiagnoseAction::Fluctuations { p: Some(p), .. },
        } => config.fluctuation_orders = p.clone(),
        _ => {}
    }
    let dir = config.resolve_output_dir(cli.out.as_deref());
    let header = Header::new(&config.hash(), config.seed, &command_name(&cli.command));
    let setup = Setup::new(config)?;
    let mut out = Emitter::new(&dir, header)?;
    let mut checks = Vec::new();
    match &cli.command {
        Command::Spectrum => commands::spectrum(&setup, &mut out)?,
        Command::Fpstate {
            action: FpstateAction::Build,
        } => {
            commands::build(&setup, &mut out)?;
        }
        Command::Diagnose { action } => match action {
            DiagnoseAction::Series { .. } => {
                commands::series(&setup, &setup.state()?, &mut out)?;
            }
            DiagnoseAction::Scan => {
                commands::scan(&setup, &mut out)?;
            }
            DiagnoseAction::KSpectrum { sub } => {
                let sub = sub.as_deref().map(commands::parse_pair).transpose()?;
                commands::k_spectrum(&setup, &setup.state()?, sub, &mut out)?;
            }
            DiagnoseAction::Fluctuations { hhat0, .. } => {
                let (re, im) = commands::parse_pair(hhat0)?;
                commands::fluctuations(&setup, &setup.state()?, C64::new(re, im), &mut out)?;
            }
        },
        Command::Kernel { action } => {
            let state = setup.state()?;
            match action {
                KernelAction::Eval { pairs, modes } => {
                    let n = modes.unwrap_or(setup.config.kernel_modes);
                    commands::kernel_eval(&setup, &state, pairs, n, &mut out)?;
                }
                KernelAction::Norms => commands::kernel_norms(&setup, &state, &mut out)?,
            }
        }
        Command::Oracle {
            action: OracleAction::Check { modes, state },
        } => {
            let st = match state {
                Some(p) => load_state(p)?,
                None => setup.state()?,
            };
            checks =
                commands::oracle_checks(&st, &commands::parse_modes(modes)?, setup.config.seed)?;
            out.table("oracle_check", &commands::checks_table(&checks))?;
        }
        Command::Run => {
            commands::spectrum(&setup, &mut out)?;
            let state = commands::build(&setup, &mut out)?;
            commands::series(&setup, &state, &mut out)?;
        }
        Command::Replicate { .. } => unreachable!("handled above"),
    }
    Ok(finish(&out, &checks))
}

fn load_state(path: &Path) -> Result<fpstate::FpState> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(fpstate::FpState::from_dump(&text)?)
}

fn error_kind(err: &anyhow::Error) -> &'static str {
    if let Some(e) = err.downcast_ref::<fpstate::Error>() {
        e.kind()
    } else if err.downcast_ref::<ConfigError>().is_some() {
        "InvalidConfig"
    } else if err.downcast_ref::<UnknownPreset>().is_some() {
        "UnknownPreset"
    } else if err
        .chain()
        .any(|c| c.downcast_ref::<std::io::Error>().is_some())
    {
        "Io"
    } else {
        "InvalidArgument"
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(err) => {
            let record = serde_json::json!({
                "error": error_kind(&err),
                "message": format!("{err:#}"),
                "tool": emit::TOOL_VERSION,
            });
            eprintln!("{record}");
            ExitCode::FAILURE
        }
    }
}
