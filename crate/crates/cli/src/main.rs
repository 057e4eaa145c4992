use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use ximsis_core::io::{self as xio, ScenarioConfig};
use ximsis_core::{
    rank, screen, Error, Experiment, NeighborRule, Result, ScreeningConfig, Selection,
};

#[derive(Parser)]
#[command(
    name = "ximsis",
    version,
    about = "Feature screening for censored survival data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rank features of a survival table by marginal utility.
    Screen(ScreenArgs),
    /// Run a simulation experiment from a TOML scenario.
    Simulate(SimulateArgs),
    /// Fill missing feature cells with weighted nearest neighbours.
    Impute(ImputeArgs),
    /// Print the rank correlation of two numeric files.
    Xi(XiArgs),
}

#[derive(Args)]
struct ScreenArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    time: String,
    #[arg(long)]
    status: String,
    /// auto:C, auto, fixed:M, sqrt, sqrt+K or sqrt-K.
    #[arg(long, default_value = "auto:1")]
    m_rule: NeighborRule,
    #[arg(long, conflicts_with = "threshold")]
    top: Option<usize>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, env = "XIMSIS_WORKERS", default_value_t = 0)]
    workers: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Impute missing cells with K neighbours before screening.
    #[arg(long, value_name = "K")]
    impute: Option<usize>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    quick: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = "XIMSIS_WORKERS")]
    workers: Option<usize>,
    /// Keep per-replication rankings in report.json.
    #[arg(long)]
    keep_records: bool,
}

#[derive(Args)]
struct ImputeArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "time")]
    time: String,
    #[arg(long, default_value = "status")]
    status: String,
    #[arg(long, default_value_t = 15)]
    k: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct XiArgs {
    #[arg(long)]
    u: PathBuf,
    #[arg(long)]
    v: PathBuf,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn meta_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

fn run_screen(args: ScreenArgs) -> Result<()> {
    let table = xio::load_survival_csv(&args.data, &args.time, &args.status)?;
    let missing = table.missing_count();
    let x = match args.impute {
        Some(k) => {
            info!("imputing {missing} missing cells with K = {k}");
            xio::knn_impute(&table, k)?
        }
        None => table.complete_features()?,
    };
    let resp = table.response()?;
    let selection = match (args.top, args.threshold) {
        (Some(d), _) => Selection::TopD(d),
        (None, Some(g)) => Selection::Threshold(g),
        (None, None) => Selection::DefaultModelSize,
    };
    let cfg = ScreeningConfig {
        neighbors: args.m_rule,
        selection,
        tie_seed: args.seed,
        workers: args.workers,
    };
    let result = screen(x.view(), &resp, &cfg)?;
    if !result.degenerate.is_empty() {
        warn!(
            "{} constant features scored as zero",
            result.degenerate.len()
        );
    }
    let rows = xio::screening_rows(&result, Some(&table.feature_names));
    let mut w = output(args.out.as_deref())?;
    xio::write_screening_csv(&mut w, &rows)?;
    w.flush()?;
    if let Some(out) = &args.out {
        let meta = serde_json::json!({
            "n": resp.len(),
            "p": table.n_features(),
            "m_rule": args.m_rule.to_string(),
            "m_used": result.m_used,
            "seed": args.seed,
            "selected": result.selected.len(),
            "censoring_rate": resp.censoring_rate(),
            "degenerate": result.degenerate,
            "imputation": args.impute.map(|k| serde_json::json!({
                "k": k,
                "cells": missing,
                "kernel": xio::KNN_KERNEL,
            })),
        });
        xio::write_json(File::create(meta_path(out))?, &meta)?;
    }
    Ok(())
}

fn run_simulate(args: SimulateArgs) -> Result<()> {
    let cfg = ScenarioConfig::load(&args.config)?;
    let mut spec = cfg.to_spec(args.quick)?;
    if let Some(w) = args.workers {
        spec.workers = w;
    }
    info!(
        "{} n={} p={} CR={} reps={}",
        spec.scenario.model.name(),
        spec.scenario.n,
        spec.scenario.p,
        spec.scenario.target_cr,
        spec.n_reps
    );
    let exp = Experiment::prepare(spec)?;
    info!("censoring bound c = {}", exp.c_upper());
    let mut report = exp.run()?;
    if !args.keep_records {
        report.replications.clear();
    }
    match &args.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            xio::write_report_csv(
                BufWriter::new(File::create(dir.join("report.csv"))?),
                &report.rows,
            )?;
            xio::write_json(
                BufWriter::new(File::create(dir.join("report.json"))?),
                &report,
            )?;
        }
        None => {
            let mut w = output(None)?;
            xio::write_report_csv(&mut w, &report.rows)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn run_impute(args: ImputeArgs) -> Result<()> {
    let table = xio::load_survival_csv(&args.data, &args.time, &args.status)?;
    let x = xio::knn_impute(&table, args.k)?;
    info!(
        "imputed {} cells, K = {} ({})",
        table.missing_count(),
        args.k,
        xio::KNN_KERNEL
    );
    let mut w = output(args.out.as_deref())?;
    let mut header = vec![table.time_col.clone(), table.status_col.clone()];
    header.extend(table.feature_names.iter().cloned());
    writeln!(w, "{}", header.join(","))?;
    for (i, row) in x.rows().into_iter().enumerate() {
        let mut cells = vec![xio::fmt_f64(table.time[i]), table.status[i].to_string()];
        cells.extend(row.iter().map(|&v| xio::fmt_f64(v)));
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()?;
    Ok(())
}

fn read_numbers(path: &Path) -> Result<Vec<f64>> {
    fs::read_to_string(path)?
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Error::Data(format!("{}: {s:?} is not a number", path.display())))
        })
        .collect()
}

fn run_xi(args: XiArgs) -> Result<()> {
    let u = read_numbers(&args.u)?;
    let v = read_numbers(&args.v)?;
    println!("{}", rank::xi_nm(&u, &v, args.m, args.seed)?);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let head = msg.split("\n\n").next().unwrap_or("");
            let line = head.split_whitespace().collect::<Vec<_>>().join(" ");
            eprintln!("error[usage]: {}", line.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Screen(a) => run_screen(a),
        Command::Simulate(a) => run_simulate(a),
        Command::Impute(a) => run_impute(a),
        Command::Xi(a) => run_xi(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {}", e.kind(), e.to_string().replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
