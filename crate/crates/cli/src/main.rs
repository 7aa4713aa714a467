mod args;
mod law;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;

use narygw::dist::{pmf_closed_form, pmf_vn_with, PmfTable};
use narygw::joint::{default_j_max, joint_run};
use narygw::mc::{mc_run, McConfig, TrackMode};
use narygw::solver::{critical_mean, tau_family, tau_iterate, SolverOptions};
use narygw::tables::{reproduce_table, TableId};
use narygw::{Error, Execution, LawSpec};

use crate::args::{Cli, Command, Format};

/// Joint tables retaining less probability than this get a warning.
const LOW_RETAINED_MASS: f64 = 0.5;

/// Largest censored fraction accepted from a simulation.
const MAX_CENSORED_FRAC: f64 = 1e-3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Numeric(#[from] Error),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Numeric(Error::BudgetDominated { .. }) => 3,
            CliError::Numeric(_) | CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

type Sink = Box<dyn Write>;

fn sink(cli: &Cli) -> Result<Sink, CliError> {
    Ok(match &cli.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn execution(cli: &Cli) -> Result<Execution, CliError> {
    let workers = match std::env::var("NARYGW_THREADS") {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("NARYGW_THREADS={v:?} is not a thread count")))?,
        ),
        Err(_) => cli.workers,
    };
    Ok(match workers {
        None | Some(0) => Execution::Auto,
        Some(w) => Execution::with_workers(w),
    })
}

fn csv_writer(out: Sink) -> csv::Writer<Sink> {
    csv::WriterBuilder::new().flexible(true).from_writer(out)
}

fn write_json<T: Serialize>(mut out: Sink, value: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn finish(mut w: csv::Writer<Sink>, footer: &[(&str, String)]) -> Result<(), CliError> {
    w.flush()?;
    let mut out = w.into_inner().map_err(|e| e.into_error())?;
    for (key, value) in footer {
        writeln!(out, "# {key},{value}")?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct TauReport {
    arity: usize,
    tau: f64,
    iterations: usize,
    residual: f64,
    tau_family: Option<f64>,
    delta: Option<f64>,
}

fn cmd_tau(cli: &Cli, out: Sink) -> Result<(), CliError> {
    let Command::Tau { law, arities, tol, trajectory } = &cli.command else { unreachable!() };
    let law = law::build(law)?;
    let opts = SolverOptions { tol: *tol, record_trajectory: *trajectory, ..Default::default() };
    let mut reports = Vec::new();
    let mut paths = Vec::new();
    for n in arities.clone() {
        let it = tau_iterate(&law, n, opts)?;
        let family = match law.spec() {
            LawSpec::Generic { .. } => None,
            _ => Some(tau_family(&law, n)?.tau),
        };
        if let Some(t) = it.trajectory.clone() {
            paths.push((n, t));
        }
        reports.push(TauReport {
            arity: n,
            tau: it.tau,
            iterations: it.iterations,
            residual: it.residual,
            tau_family: family,
            delta: family.map(|f| (f - it.tau).abs()),
        });
    }
    if *trajectory {
        return match cli.format {
            Format::Json => write_json(out, &paths),
            Format::Csv => {
                let mut w = csv_writer(out);
                w.write_record(["N", "n", "tau"])?;
                for (n, path) in &paths {
                    for (k, t) in path.iter().enumerate() {
                        w.serialize((n, k, t))?;
                    }
                }
                finish(w, &[])
            }
        };
    }
    match cli.format {
        Format::Json => write_json(out, &reports),
        Format::Csv => {
            let mut w = csv_writer(out);
            w.write_record(["N", "tau", "iterations", "residual", "tau_family", "delta"])?;
            for r in &reports {
                w.serialize((r.arity, r.tau, r.iterations, r.residual, r.tau_family, r.delta))?;
            }
            finish(w, &[])
        }
    }
}

fn cmd_tables(cli: &Cli, which: u8, mut out: Sink) -> Result<(), CliError> {
    let table = reproduce_table(TableId::from_index(which)?)?;
    match cli.format {
        Format::Csv => {
            out.write_all(table.to_csv().as_bytes())?;
            out.flush()?;
            Ok(())
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Row {
                arity: usize,
                cells: Vec<f64>,
            }
            #[derive(Serialize)]
            struct Printed {
                table: u8,
                header: Vec<String>,
                rows: Vec<Row>,
            }
            let rows = table.rows.iter().map(|r| Row { arity: r.arity, cells: r.cells(table.id) }).collect();
            write_json(out, &Printed { table: which, header: table.header(), rows })
        }
    }
}

fn cmd_pmf(cli: &Cli, out: Sink) -> Result<(), CliError> {
    let Command::Pmf { law, arities, tol, closed_form } = &cli.command else { unreachable!() };
    let law = law::build(law)?;
    let opts = SolverOptions { tol: *tol, ..Default::default() };
    let tables = arities
        .clone()
        .map(|n| if *closed_form { pmf_closed_form(&law, n) } else { pmf_vn_with(&law, n, opts) })
        .collect::<Result<Vec<PmfTable>, _>>()?;
    match cli.format {
        Format::Json => write_json(out, &tables),
        Format::Csv => {
            let mut w = csv_writer(out);
            w.write_record(["N", "tau", "mean", "tail", "j", "prob"])?;
            for t in &tables {
                for (j, p) in t.probs.iter().enumerate() {
                    w.serialize((t.arity, t.tau, t.mean, t.tail, j, p))?;
                }
            }
            finish(w, &[])
        }
    }
}

fn cmd_critical(cli: &Cli, out: Sink) -> Result<(), CliError> {
    let Command::Critical { law, arities } = &cli.command else { unreachable!() };
    let family = law::critical_family(law)?;
    let values = arities.clone().map(|n| critical_mean(family, n)).collect::<Result<Vec<_>, _>>()?;
    match cli.format {
        Format::Json => write_json(out, &values),
        Format::Csv => {
            let mut w = csv_writer(out);
            w.write_record(["N", "m_crit", "tau_crit", "y"])?;
            for v in &values {
                w.serialize((v.arity, v.m_crit, v.tau_crit, v.y))?;
            }
            finish(w, &[])
        }
    }
}

fn cmd_joint(cli: &Cli, out: Sink) -> Result<(), CliError> {
    let Command::Joint { law, arity, height, degree, jmax } = &cli.command else { unreachable!() };
    let law = law::build(law)?;
    let j_max = jmax.unwrap_or_else(|| default_j_max(*degree, *arity));
    let table = joint_run(&law, *arity, *height, *degree, j_max, execution(cli)?)?;
    let retained = table.retained_mass.last().copied().unwrap_or(1.0);
    if retained < LOW_RETAINED_MASS {
        eprintln!(
            "narygw: warning: only {retained:.3} of the progeny mass has nu_n <= T = {degree}; raise --T for a fuller table"
        );
    }
    match cli.format {
        Format::Json => write_json(out, &table),
        Format::Csv => {
            let mut w = csv_writer(out);
            w.write_record(["j", "t", "prob"])?;
            for (j, row) in table.rows.iter().enumerate() {
                for (t, p) in row.iter().enumerate() {
                    w.serialize((j, t, p))?;
                }
            }
            finish(
                w,
                &[("retained_mass", retained.to_string()), ("phi_mass", table.phi_mass.to_string())],
            )
        }
    }
}

fn cmd_simulate(cli: &Cli, out: Sink) -> Result<(), CliError> {
    let Command::Simulate { law, arity, height, reps, seed, budget, progeny } = &cli.command else {
        unreachable!()
    };
    let law = law::build(law)?;
    let mut cfg = McConfig::new(*arity, *height, *reps, *seed);
    cfg.budget = *budget;
    cfg.mode = if *progeny { TrackMode::WithProgeny } else { TrackMode::SubtreesOnly };
    cfg.execution = execution(cli)?;
    let summary = mc_run(&law, &cfg)?;
    match cli.format {
        Format::Json => write_json(out, &summary)?,
        Format::Csv => {
            let mut w = csv_writer(out);
            w.write_record(["j", "count", "p_hat", "stderr", "wilson_lo", "wilson_hi"])?;
            for e in &summary.estimates {
                w.serialize((e.j, e.count, e.p_hat, e.stderr, e.wilson.0, e.wilson.1))?;
            }
            let mut footer = vec![
                ("tau_hat", summary.tau_hat.to_string()),
                ("tau_stderr", summary.tau_stderr.to_string()),
                ("tau_wilson_lo", summary.tau_wilson.0.to_string()),
                ("tau_wilson_hi", summary.tau_wilson.1.to_string()),
                ("mean_v", summary.mean_v.to_string()),
                ("reps", summary.reps.to_string()),
                ("completed", summary.completed.to_string()),
                ("censored_frac", summary.censored_frac.to_string()),
                ("seed", summary.seed.to_string()),
            ];
            if let Some(nu) = summary.mean_progeny {
                footer.push(("mean_progeny", nu.to_string()));
            }
            finish(w, &footer)?;
        }
    }
    if summary.censored_frac > MAX_CENSORED_FRAC {
        return Err(Error::BudgetDominated { censored_frac: summary.censored_frac }.into());
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let out = sink(cli)?;
    match &cli.command {
        Command::Tau { .. } => cmd_tau(cli, out),
        Command::Tables { which } => cmd_tables(cli, *which, out),
        Command::Pmf { .. } => cmd_pmf(cli, out),
        Command::Critical { .. } => cmd_critical(cli, out),
        Command::Joint { .. } => cmd_joint(cli, out),
        Command::Simulate { .. } => cmd_simulate(cli, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("narygw: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
