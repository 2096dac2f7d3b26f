use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use chemonet::grid::build_grid_with_cfl;
use chemonet::network::Network;
use chemonet::runner::output::{
    write_diagnostics, write_order_table, write_regime_map, SnapshotWriter,
};
use chemonet::runner::{converge, preset, sweep, Model, RunConfig, Simulation, SweepSpec, Termination, PRESETS};
use chemonet::steady::{constant_steady_state, simplified_stationary};
use chemonet::{Error, Result};

#[derive(Parser)]
#[command(name = "chemonet", version, about = "Chemotaxis on networks: AHO / Crank-Nicolson solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// JSON configuration file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Named preset instead of a configuration file.
    #[arg(long)]
    preset: Option<String>,
}

impl Source {
    fn load(&self) -> Result<RunConfig> {
        match (&self.config, &self.preset) {
            (Some(path), _) => RunConfig::load(path),
            (None, Some(name)) => preset(name),
            (None, None) => Err(Error::Config("pass --config PATH or --preset NAME".into())),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check a configuration against every structural condition.
    Validate {
        #[command(flatten)]
        source: Source,
    },
    /// Run a simulation and write snapshots and diagnostics.
    Run {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Snapshot interval in time units.
        #[arg(long)]
        snapshot_every: Option<f64>,
        /// Blow-up threshold as a multiple of the initial max |u|.
        #[arg(long)]
        threshold: Option<f64>,
        /// Override the final time.
        #[arg(long)]
        t_final: Option<f64>,
    },
    /// Print the analytic stationary state of a configuration.
    Steady {
        #[command(flatten)]
        source: Source,
    },
    /// Self-convergence study on successively halved steps.
    Converge {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 3)]
        levels: u32,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Regime map over (lambda1, lambda2) for the two-arc blow-up family.
    Sweep {
        /// Comma-separated lambda1 values.
        #[arg(long, value_delimiter = ',')]
        lambda1: Option<Vec<f64>>,
        /// Comma-separated lambda2 values.
        #[arg(long, value_delimiter = ',')]
        lambda2: Option<Vec<f64>>,
        #[arg(long)]
        t_final: Option<f64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Built-in experiment presets.
    Preset {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    List,
    /// Print a preset as JSON.
    Show { name: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn file_stem(cfg: &RunConfig) -> &str {
    if cfg.name.is_empty() {
        "run"
    } else {
        &cfg.name
    }
}

fn validate(cfg: &RunConfig) -> Result<Network> {
    let net = cfg.network()?;
    let report = net.validate()?;
    let grid = build_grid_with_cfl(&net, cfg.k, cfg.cfl)?;
    for (arc, g) in net.arcs().iter().zip(&grid.arcs) {
        println!("arc {}: L = {}, lambda = {}, h = {}, M = {}", arc.id, arc.length, arc.lambda, g.h, g.m);
    }
    for (id, d) in &report.dissipative {
        println!(
            "node {id}: {} (row sums {:?})",
            if d.dissipative { "dissipative" } else { "non-dissipative" },
            d.row_sums
        );
    }
    Ok(net)
}

fn execute(command: Command) -> Result<ExitCode> {
    match command {
        Command::Validate { source } => {
            validate(&source.load()?)?;
            println!("ok");
            Ok(ExitCode::SUCCESS)
        }
        Command::Run {
            source,
            out,
            snapshot_every,
            threshold,
            t_final,
        } => {
            let mut cfg = source.load()?;
            if snapshot_every.is_some() {
                cfg.snapshot_every = snapshot_every;
            }
            if let Some(t) = threshold {
                cfg.blowup_factor = t;
            }
            if let Some(t) = t_final {
                cfg.t_final = t;
            }
            run(&cfg, &out)
        }
        Command::Steady { source } => {
            let cfg = source.load()?;
            let net = cfg.network()?;
            let mu0 = cfg.initial.mass(&net);
            match &cfg.model {
                Model::Simplified { alpha } => {
                    let s = simplified_stationary(&net, alpha, mu0)?;
                    println!("{}", serde_json::to_string_pretty(&s)?);
                }
                _ => {
                    let s = constant_steady_state(&net, mu0)?;
                    println!("{}", serde_json::to_string_pretty(&s)?);
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Converge { source, levels, out } => {
            let cfg = source.load()?;
            let rows = converge(&cfg, levels)?;
            let path = out.join(format!("{}_orders.csv", file_stem(&cfg)));
            write_order_table(&path, &rows)?;
            println!("h,gamma_u,error_u,gamma_phi,error_phi,gamma_v,error_v");
            for r in &rows {
                let g = |x: Option<f64>| x.map_or("-".to_string(), |x| format!("{x:.6}"));
                println!(
                    "{},{},{:.6e},{},{:.6e},{},{:.6e}",
                    r.h,
                    g(r.gamma_u),
                    r.error_u,
                    g(r.gamma_phi),
                    r.error_phi,
                    g(r.gamma_v),
                    r.error_v
                );
            }
            println!("wrote {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep {
            lambda1,
            lambda2,
            t_final,
            out,
        } => {
            let mut spec = SweepSpec::default();
            if let Some(l) = lambda1 {
                spec.lambda1 = l;
            }
            if let Some(l) = lambda2 {
                spec.lambda2 = l;
            }
            if let Some(t) = t_final {
                spec.t_final = t;
            }
            let cells = sweep(&spec);
            let path = out.join("regime_map.csv");
            write_regime_map(&path, &cells)?;
            for c in &cells {
                println!(
                    "lambda = ({}, {}): {}",
                    c.lambda1,
                    c.lambda2,
                    c.regime.map_or_else(|| format!("skipped ({})", c.note), |r| r.to_string())
                );
            }
            println!("wrote {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Preset { action } => {
            match action {
                PresetAction::List => PRESETS.iter().for_each(|p| println!("{p}")),
                PresetAction::Show { name } => println!("{}", preset(&name)?.to_json()),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn run(cfg: &RunConfig, out: &Path) -> Result<ExitCode> {
    let mut sim = Simulation::new(cfg)?;
    for w in sim.warnings() {
        eprintln!("warning: {w}");
    }
    let stem = file_stem(cfg);
    let mut writer = SnapshotWriter::create(out.join(format!("{stem}_snapshots.csv")))?;
    let net = sim.network().clone();
    let grid = sim.grid().clone();
    let mut failure = None;
    let summary = sim.run(cfg, &mut |state| {
        if failure.is_none() {
            failure = writer.write(state, &net, &grid).err();
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    writer.finish()?;
    write_diagnostics(&out.join(format!("{stem}_diagnostics.csv")), &summary.records)?;
    let status = match summary.termination {
        Termination::Completed => "completed",
        Termination::Steady => "steady",
        Termination::Blowup => "blowup",
    };
    println!(
        "{status} at t = {} after {} steps; mass {} (max relative drift {:.3e}); regime {}",
        summary.final_time,
        summary.steps,
        summary.initial_mass,
        summary.max_mass_drift,
        summary.regime
    );
    if let Some(b) = summary.blowup {
        println!(
            "blow-up at t = {} on arc {} index {}",
            b.time,
            net.arc(b.arc).id,
            b.index
        );
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}
