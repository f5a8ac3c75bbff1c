//! `qobs`: experiment runner writing CSV tables, manifests and SVG plots.

mod commands;
mod config;
mod error;
mod plot;
mod sweep;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::{clock, cosmo, network, tunnel};
use crate::config::{key, read_config_file, Key, Params};
use crate::error::{CliError, Result};
use crate::plot::PlotSpec;
use crate::sweep::{parse_axes, run_sweep};
use crate::table::{write_run, CsvText, ResultTable};

#[derive(Parser, Debug)]
#[command(name = "qobs", version, about = "Observer-time experiments: clocks, tunneling, networks, cosmology")]
struct Cli {
    /// Output directory (default: $QOBS_OUTPUT_DIR, then ./qobs-output).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// key=value configuration file; flags given on the command line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Dephasing under a stochastic clock and the retention time.
    Clock(ClockArgs),
    /// Barrier transmission: closed form, quadrature, WKB currents, oracle.
    Tunnel(TunnelArgs),
    /// Neural-glial network checks.
    Network(NetworkArgs),
    /// Mini-superspace branch, matter clock and constraint residual.
    Cosmo(CosmoArgs),
    /// Sweep one or two parameters of `tunnel` or `clock`.
    Sweep(SweepArgs),
    /// Render columns of a CSV file as SVG.
    Plot(PlotArgs),
}

#[derive(Args, Debug)]
struct ClockArgs {
    /// Comma-separated energy levels.
    #[arg(long)]
    energies: Option<String>,
    #[arg(long)]
    hbar: Option<String>,
    #[arg(long)]
    mu0: Option<String>,
    #[arg(long)]
    sigma: Option<String>,
    #[arg(long)]
    steps: Option<String>,
    /// Monte Carlo samples; 0 selects the exact ensemble average.
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    threshold: Option<String>,
}

impl ClockArgs {
    fn flags(&self) -> Vec<(&'static str, Option<String>)> {
        vec![
            ("energies", self.energies.clone()),
            ("hbar", self.hbar.clone()),
            ("mu0", self.mu0.clone()),
            ("sigma", self.sigma.clone()),
            ("steps", self.steps.clone()),
            ("samples", self.samples.clone()),
            ("seed", self.seed.clone()),
            ("threshold", self.threshold.clone()),
        ]
    }
}

#[derive(Args, Debug)]
struct TunnelArgs {
    #[arg(long)]
    hbar: Option<String>,
    #[arg(long)]
    mu: Option<String>,
    #[arg(long)]
    j0: Option<String>,
    #[arg(long)]
    h0: Option<String>,
    /// Add the transfer-matrix transmission.
    #[arg(long)]
    oracle: bool,
    /// Oracle half-width L, or `auto` for four turning-point distances.
    #[arg(long)]
    cap: Option<String>,
    /// Oracle grid points.
    #[arg(long)]
    points: Option<String>,
    /// Sweep axis key=lo:hi:n (repeat for a second axis).
    #[arg(long)]
    sweep: Vec<String>,
    #[arg(long)]
    seed: Option<String>,
}

impl TunnelArgs {
    fn flags(&self) -> Vec<(&'static str, Option<String>)> {
        vec![
            ("hbar", self.hbar.clone()),
            ("mu", self.mu.clone()),
            ("j0", self.j0.clone()),
            ("h0", self.h0.clone()),
            ("oracle", self.oracle.then(|| "true".to_string())),
            ("cap", self.cap.clone()),
            ("points", self.points.clone()),
            ("sweep", (!self.sweep.is_empty()).then(|| self.sweep.join(" "))),
            ("seed", self.seed.clone()),
        ]
    }
}

#[derive(Args, Debug)]
struct NetworkArgs {
    /// gauge-check, ek, rolldown or entropy.
    #[arg(long)]
    mode: Option<String>,
    /// Sites (gauge-check, ek) or neurons (rolldown, entropy).
    #[arg(long)]
    n: Option<String>,
    /// Temporal dimension; a comma-separated list runs each value.
    #[arg(long = "N")]
    big_n: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    draws: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    h0: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    patterns: Option<String>,
    #[arg(long)]
    flips: Option<String>,
    #[arg(long)]
    sweeps: Option<String>,
    #[arg(long)]
    steps: Option<String>,
    #[arg(long)]
    window: Option<String>,
}

impl NetworkArgs {
    fn flags(&self) -> Vec<(&'static str, Option<String>)> {
        vec![
            ("mode", self.mode.clone()),
            ("n", self.n.clone()),
            ("N", self.big_n.clone()),
            ("beta", self.beta.clone()),
            ("draws", self.draws.clone()),
            ("samples", self.samples.clone()),
            ("seed", self.seed.clone()),
            ("h0", self.h0.clone()),
            ("trials", self.trials.clone()),
            ("patterns", self.patterns.clone()),
            ("flips", self.flips.clone()),
            ("sweeps", self.sweeps.clone()),
            ("steps", self.steps.clone()),
            ("window", self.window.clone()),
        ]
    }
}

#[derive(Args, Debug)]
struct CosmoArgs {
    /// quadratic:c, constant:c or table:FILE.
    #[arg(long)]
    potential: Option<String>,
    #[arg(long = "hbar-list")]
    hbar_list: Option<String>,
    #[arg(long)]
    a0: Option<String>,
    #[arg(long = "a-max")]
    a_max: Option<String>,
    #[arg(long = "t-max")]
    t_max: Option<String>,
    #[arg(long)]
    outputs: Option<String>,
    #[arg(long)]
    points: Option<String>,
    /// none, twolevel:ω or file:FILE.
    #[arg(long)]
    matter: Option<String>,
    /// hbar (matter energies scale with ħ) or fixed.
    #[arg(long = "matter-scaling")]
    matter_scaling: Option<String>,
    #[arg(long)]
    substeps: Option<String>,
    #[arg(long)]
    seed: Option<String>,
}

impl CosmoArgs {
    fn flags(&self) -> Vec<(&'static str, Option<String>)> {
        vec![
            ("potential", self.potential.clone()),
            ("hbar-list", self.hbar_list.clone()),
            ("a0", self.a0.clone()),
            ("a-max", self.a_max.clone()),
            ("t-max", self.t_max.clone()),
            ("outputs", self.outputs.clone()),
            ("points", self.points.clone()),
            ("matter", self.matter.clone()),
            ("matter-scaling", self.matter_scaling.clone()),
            ("substeps", self.substeps.clone()),
            ("seed", self.seed.clone()),
        ]
    }
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// One or two axes, each key=lo:hi:n.
    axes: Vec<String>,
    /// tunnel (default) or clock.
    #[arg(long)]
    target: Option<String>,
    /// Fixed parameter of the target, key=value (repeatable).
    #[arg(long = "set")]
    set: Vec<String>,
}

#[derive(Args, Debug)]
struct PlotArgs {
    /// CSV file to read.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    x: String,
    /// Comma-separated y columns.
    #[arg(long)]
    y: String,
    #[arg(long)]
    log_x: bool,
    #[arg(long)]
    log_y: bool,
    #[arg(long)]
    title: Option<String>,
    /// SVG path (default: the input with an .svg extension).
    #[arg(long)]
    output: Option<PathBuf>,
}

fn file_entries(cli: &Cli) -> Result<Vec<(String, String)>> {
    match &cli.config {
        Some(path) => read_config_file(path),
        None => Ok(Vec::new()),
    }
}

fn emit(cli: &Cli, stem: &str, params: &Params, tables: &[ResultTable]) -> Result<()> {
    let dir = config::output_dir(cli.out.as_deref());
    for path in write_run(&dir, stem, params, tables)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn sweep_keys(target: &str) -> Result<Vec<Key>> {
    let target_keys: &[Key] = match target {
        "tunnel" => tunnel::KEYS,
        "clock" => clock::KEYS,
        other => {
            return Err(CliError::Validation(format!(
                "sweep target must be tunnel or clock, got {other:?}"
            )))
        }
    };
    let mut keys = vec![key("target", "tunnel"), key("axes", "")];
    keys.extend(target_keys.iter().copied().filter(|k| k.name != "sweep"));
    Ok(keys)
}

fn run_sweep_command(cli: &Cli, args: &SweepArgs) -> Result<()> {
    let file = file_entries(cli)?;
    let target = args
        .target
        .clone()
        .or_else(|| file.iter().find(|(k, _)| k == "target").map(|(_, v)| v.clone()))
        .unwrap_or_else(|| "tunnel".to_string());
    let keys = sweep_keys(&target)?;
    let mut flags: Vec<(&str, Option<String>)> = vec![
        ("target", Some(target.clone())),
        ("axes", (!args.axes.is_empty()).then(|| args.axes.join(" "))),
    ];
    for s in &args.set {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| CliError::Validation(format!("--set expects key=value, got {s:?}")))?;
        let name = keys
            .iter()
            .find(|key| key.name == k.trim() && !["target", "axes"].contains(&key.name))
            .ok_or_else(|| CliError::Validation(format!("unknown key '{}' for {target}", k.trim())))?
            .name;
        flags.push((name, Some(v.trim().to_string())));
    }
    let params = Params::resolve("sweep", &keys, &file, &flags)?;
    let axes = parse_axes(params.str("axes"))?;
    if let Some(a) = axes.iter().find(|a| ["target", "axes", "seed"].contains(&a.key.as_str())) {
        return Err(CliError::Validation(format!("cannot sweep '{}'", a.key)));
    }
    let table = match target.as_str() {
        "tunnel" => {
            let oracle = params.bool("oracle")?;
            run_sweep("sweep", &params, &axes, tunnel::columns(oracle), tunnel::row)?
        }
        _ => run_sweep("sweep", &params, &axes, clock::summary_columns(), clock::summary_row)?,
    };
    emit(cli, "sweep", &params, &[table])
}

fn run_plot(args: &PlotArgs) -> Result<()> {
    let table = CsvText::read(&args.input)?;
    let spec = PlotSpec {
        x: args.x.clone(),
        y: args.y.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
        log_x: args.log_x,
        log_y: args.log_y,
        title: args.title.clone(),
    };
    let series = plot::series(&table, &spec)?;
    let svg = plot::render(&spec, &series);
    let out = args.output.clone().unwrap_or_else(|| args.input.with_extension("svg"));
    std::fs::write(&out, svg).map_err(|e| CliError::io(&out, e))?;
    for s in &series {
        if let Some(m) = s.slope {
            println!("{}: log-log slope {m:.6}", s.name);
        }
    }
    println!("{}", out.display());
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Clock(a) => {
            let p = Params::resolve("clock", clock::KEYS, &file_entries(cli)?, &a.flags())?;
            let tables = clock::run(&p)?;
            emit(cli, "clock", &p, &tables)
        }
        Command::Tunnel(a) => {
            let p = Params::resolve("tunnel", tunnel::KEYS, &file_entries(cli)?, &a.flags())?;
            let table = tunnel::run(&p)?;
            emit(cli, "tunnel", &p, &[table])
        }
        Command::Network(a) => {
            let p = Params::resolve("network", network::KEYS, &file_entries(cli)?, &a.flags())?;
            let tables = network::run(&p)?;
            emit(cli, &format!("network_{}", p.str("mode").replace('-', "_")), &p, &tables)
        }
        Command::Cosmo(a) => {
            let p = Params::resolve("cosmo", cosmo::KEYS, &file_entries(cli)?, &a.flags())?;
            let tables = cosmo::run(&p)?;
            emit(cli, "cosmo", &p, &tables)
        }
        Command::Sweep(a) => run_sweep_command(cli, a),
        Command::Plot(a) => run_plot(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qobs: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
