use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cavity_cool::config::parse_config;
use cavity_cool::error::{Error, Result};
use cavity_cool::params::{ModelParams, Variant};
use cavity_cool::pipeline::{run_oracle, run_point, run_weights, OracleOptions};
use cavity_cool::presets::{figure_preset, FigureId};
use cavity_cool::sweep::{run_sweep, Axis, SweepSpec};

#[derive(Parser, Debug)]
#[command(name = "cavity-cool", version, about = "Cavity cooling by a stream of correlated qubit pairs")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// `key = value` parameter file; missing keys keep baseline values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (stdout if omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_parser = parse_variant)]
    variant: Option<Variant>,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    #[arg(long, global = true)]
    n_max: Option<usize>,
    /// Keep the atomic frequency at the cavity frequency while Δ varies.
    #[arg(long, global = true)]
    freeze_omega: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Pair weights and stream coefficients.
    Weights,
    /// Analytic steady state at one parameter point (JSON).
    Point,
    /// Grid sweep (CSV).
    Sweep {
        /// `key:min:max:points[:log]` or `key=v1,v2,...`; give once or twice.
        #[arg(long = "axis", required = true)]
        axes: Vec<String>,
    },
    /// Brute-force simulation compared with the analytic steady state (JSON).
    Oracle(OracleArgs),
    /// Figure preset (CSV; multi-panel figures write `<stem>_<panel>.csv`).
    Figure {
        id: String,
        /// Bath temperature for the preset (K).
        #[arg(long)]
        t_bath: Option<f64>,
    },
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(long)]
    collisions: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    /// Deterministic arrival-averaged evolution instead of sampled arrivals.
    #[arg(long)]
    mean_field: bool,
    /// Write `t,n_mean,tail_mass` rows here (variant suffix added for `both`).
    #[arg(long)]
    trajectory: Option<PathBuf>,
    #[arg(long)]
    exchange_during_dwell: bool,
    /// Run every collision through the full joint-state map.
    #[arg(long)]
    check_every_step: bool,
}

fn parse_variant(s: &str) -> std::result::Result<Variant, String> {
    s.parse()
}

fn load_params(g: &Global) -> Result<ModelParams> {
    let mut p = match &g.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::Config {
                line: 0,
                message: format!("cannot read {}: {e}", path.display()),
            })?;
            parse_config(&text)?
        }
        None => ModelParams::default(),
    };
    if let Some(v) = g.variant {
        p.variant = v;
    }
    p.freeze_omega |= g.freeze_omega;
    Ok(p)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: serde::Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let mut out = output(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|e| format!(".{}", e.to_string_lossy())).unwrap_or_default();
    path.with_file_name(format!("{stem}_{suffix}{ext}"))
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    let out = g.out.as_deref();
    match cli.command {
        Command::Weights => write_json(&run_weights(&load_params(g)?)?, out),
        Command::Point => write_json(&run_point(&load_params(g)?)?, out),
        Command::Sweep { axes } => {
            let axes = axes.iter().map(|a| a.parse::<Axis>()).collect::<Result<Vec<_>>>()?;
            let spec = SweepSpec::new(axes, load_params(g)?)?;
            let result = run_sweep(&spec)?;
            let mut w = output(out)?;
            result.write_csv(&mut w)?;
            w.flush()?;
            Ok(())
        }
        Command::Oracle(args) => {
            let params = load_params(g)?;
            let opts = OracleOptions {
                seed: g.seed,
                mean_field: args.mean_field,
                n_max: g.n_max,
                collisions: args.collisions,
                burn_in: args.burn_in,
                exchange_during_dwell: args.exchange_during_dwell,
                check_every_step: args.check_every_step,
                record_trajectory: args.trajectory.is_some(),
            };
            let report = run_oracle(&params, &opts)?;
            if let Some(path) = &args.trajectory {
                for run in &report.runs {
                    let target = if report.runs.len() > 1 {
                        with_suffix(path, run.coupling.label())
                    } else {
                        path.clone()
                    };
                    run.outcome.write_trajectory(BufWriter::new(File::create(target)?))?;
                }
            }
            write_json(&report, out)
        }
        Command::Figure { id, t_bath } => {
            let id: FigureId = id.parse().map_err(|e: Error| Error::Config {
                line: 0,
                message: e.to_string(),
            })?;
            if g.config.is_some() {
                return Err(Error::Config {
                    line: 0,
                    message: "figure presets use the baseline; use `sweep` for custom parameters".into(),
                });
            }
            let mut base = ModelParams::default();
            if let Some(v) = g.variant {
                base.variant = v;
            }
            base.freeze_omega = g.freeze_omega;
            if let Some(t) = t_bath {
                base.t_bath = t;
            }
            let preset = figure_preset(id, &base)?;
            let multi = preset.panels.len() > 1;
            let default_stem = PathBuf::from(format!("{id}.csv"));
            for panel in &preset.panels {
                let result = run_sweep(&panel.spec)?;
                let target = match (multi, out) {
                    (false, p) => p.map(Path::to_path_buf),
                    (true, Some(p)) => Some(with_suffix(p, panel.name)),
                    (true, None) => Some(with_suffix(&default_stem, panel.name)),
                };
                let mut w = output(target.as_deref())?;
                result.write_csv(&mut w)?;
                w.flush()?;
            }
            Ok(())
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } | Error::InvalidParameter { .. } | Error::Sweep(_) => 2,
        Error::Validity(_) => 3,
        Error::Convergence { .. } => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
