//! `husimi-flow`: propagate, transform, compute currents and topology, and
//! run the double-well experiment from the command line.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use husimi_flow::experiment::{run_analytic_suite, run_experiment, time_dir, ExperimentConfig, Pipeline};
use husimi_flow::flow::OrderTag;
use husimi_flow::{io, Error, Result};

#[derive(Parser)]
#[command(name = "husimi-flow", version, about = "Husimi phase-space flow simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON config file, or `default` for the double-well setup.
    #[arg(long, default_value = "default")]
    config: String,
    /// Output root; overrides the config's `out_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Single time to process instead of the config's record times.
    #[arg(long)]
    time: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate the initial state and dump ψ at each time.
    Propagate(Common),
    /// Dump the Husimi function at each time.
    Husimi(Common),
    /// Dump one current field at each time.
    Flow {
        #[command(flatten)]
        common: Common,
        /// Order tag: `q` for orders ≤ q, `only<q>`, `exact` or `classical`.
        #[arg(long, default_value = "exact")]
        order: String,
    },
    /// Write zeros, stagnation points and pairing at each time.
    Topology(Common),
    /// Run a full experiment bundle.
    Experiment {
        #[command(subcommand)]
        which: Experiment,
    },
    /// Run the analytic check suite.
    Verify {
        /// Directory for `verify.json`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Experiment {
    DoubleWell(Common),
}

fn setup(common: &Common) -> Result<(Pipeline, Vec<f64>, PathBuf)> {
    let mut config = ExperimentConfig::load(&common.config)?;
    if let Some(out) = &common.out {
        config.out_dir = out.clone();
    }
    if let Some(t) = common.time {
        config.record_times = vec![t];
    }
    config.validate()?;
    let root = config.out_dir.join(&config.name);
    let times = config.record_times.clone();
    Ok((Pipeline::new(config)?, times, root))
}

/// Calls `f` on every recorded state with its output directory, which already
/// holds the resolved config.
fn for_each_slice<F>(common: &Common, mut f: F) -> Result<()>
where
    F: FnMut(&Pipeline, &husimi_flow::husimi::PositionWavefunction, f64, &Path) -> Result<()>,
{
    let (pipeline, times, root) = setup(common)?;
    let run = pipeline.propagate(None)?;
    for t in times {
        let snap = run.at(t).ok_or_else(|| Error::Validation(format!("time {t} was not recorded")))?;
        let dir = root.join(time_dir(t));
        std::fs::create_dir_all(&dir)?;
        io::write_json(&dir.join("config.json"), &pipeline.config)?;
        f(&pipeline, &snap.state, t, &dir)?;
    }
    Ok(())
}

fn written(path: &Path) {
    println!("{}", path.display());
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Propagate(common) => for_each_slice(&common, |_, wf, t, dir| {
            let path = dir.join("psi.csv");
            io::with_file(&path, |w| io::write_snapshot_csv(w, wf, t))?;
            written(&path);
            Ok(())
        })?,
        Command::Husimi(common) => for_each_slice(&common, |p, wf, t, dir| {
            let field = p.field(wf, t)?;
            let path = dir.join("husimi.csv");
            io::with_file(&path, |w| io::write_field_csv(w, &field, None, "none"))?;
            written(&path);
            Ok(())
        })?,
        Command::Flow { common, order } => {
            let tag: OrderTag = order.parse()?;
            for_each_slice(&common, |p, wf, t, dir| {
                let field = p.field(wf, t)?;
                let j = p.current(&p.stack(&field)?, tag)?;
                let path = dir.join(format!("current_{}.csv", order.trim()));
                io::with_file(&path, |w| io::write_field_csv(w, &field, Some(&j), order.trim()))?;
                written(&path);
                Ok(())
            })?
        }
        Command::Topology(common) => for_each_slice(&common, |p, wf, t, dir| {
            let slice = p.analyze(wf, t, false)?;
            let records = slice.records();
            io::write_json(&dir.join("topology.json"), &records)?;
            io::with_file(&dir.join("topology.csv"), |w| io::write_topology_csv(w, &records))?;
            io::write_json(&dir.join("pairing.json"), &slice.report)?;
            written(&dir.join("topology.json"));
            Ok(())
        })?,
        Command::Experiment { which: Experiment::DoubleWell(common) } => {
            let (pipeline, _, root) = setup(&common)?;
            let summary = run_experiment(&pipeline.config)?;
            for s in &summary.slices {
                println!(
                    "t={} zeros={} saddles={} unpaired={} inversion={} residual={:.3e}",
                    s.t,
                    s.zeros,
                    s.saddles,
                    s.unpaired_zeros,
                    s.inversion_nodes,
                    s.residual.map_or(f64::NAN, |r| r.rel_l2)
                );
            }
            written(&root.join("summary.json"));
        }
        Command::Verify { out } => {
            let report = run_analytic_suite();
            for v in &report {
                let mark = if v.passed { "PASS" } else { "FAIL" };
                println!("{mark} {}: {:.3e} (tolerance {:.1e}) {}", v.name, v.value, v.tolerance, v.detail);
            }
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)?;
                io::write_json(&dir.join("verify.json"), &report)?;
            }
            return Ok(report.iter().all(|v| v.passed));
        }
    }
    Ok(true)
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
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}
