use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use opc_core::analysis::{
    behavioral_stats, cdf_text, parse_runs_csv, run_sweep, runs_csv, summarize, summary_csv, Metric, SummaryRow,
    GAIN_METRICS,
};
use opc_core::config::{RunConfig, SweepSpec};
use opc_core::sim::{run, CacheStateLog};
use opc_core::Error;

#[derive(Parser)]
#[command(name = "opc-sim", version, about = "Packet-cache simulator: OPC against chunk-level LRU")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Write metrics, per-router/receiver CSVs, snapshots and the
        /// resolved config here instead of printing the metrics.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every configuration of a sweep spec.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; 0 picks one per core.
        #[arg(long, default_value_t = 0)]
        parallel: usize,
    },
    /// Summarize a sweep directory, or print rank CDFs of a run directory.
    Report {
        #[arg(long = "in")]
        dir: PathBuf,
        #[arg(long, conflicts_with = "cdf")]
        csv: bool,
        #[arg(long)]
        cdf: bool,
    },
}

enum Failure {
    Usage(String),
    Failed(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Failed(e.to_string())
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
    move |e| Failure::Failed(format!("{}: {e}", path.display()))
}

fn require_file(path: &Path) -> Result<(), Failure> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("{}: no such file", path.display())))
    }
}

fn write(dir: &Path, name: &str, text: &str) -> Result<(), Failure> {
    let p = dir.join(name);
    fs::write(&p, text).map_err(io_err(&p))
}

/// Writes to stdout; a closed pipe (`| head`) is not an error.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn base_dir(path: &Path) -> &Path {
    path.parent().unwrap_or(Path::new("."))
}

fn cmd_run(config: &Path, out: Option<&Path>) -> Result<(), Failure> {
    require_file(config)?;
    let cfg = RunConfig::load(config)?.resolved();
    let report = run(&cfg.build(base_dir(config))?)?;
    match out {
        None => emit(&report.to_kv()),
        Some(dir) => {
            fs::create_dir_all(dir).map_err(io_err(dir))?;
            write(dir, "metrics.txt", &report.to_kv())?;
            write(dir, "routers.csv", &report.routers_csv())?;
            write(dir, "receivers.csv", &report.receivers_csv())?;
            write(dir, "config.toml", &cfg.to_toml())?;
            if !report.snapshots.is_empty() {
                write(dir, "snapshots.log", &report.snapshots_text())?;
            }
            eprintln!("wrote run outputs to {}", dir.display());
        }
    }
    Ok(())
}

fn cmd_sweep(spec_path: &Path, out: &Path, parallel: usize) -> Result<(), Failure> {
    require_file(spec_path)?;
    let spec = SweepSpec::load(spec_path)?;
    let threads = if parallel == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        parallel
    };
    let result = run_sweep(&spec, base_dir(spec_path), threads)?;
    let runs_dir = out.join("runs");
    fs::create_dir_all(&runs_dir).map_err(io_err(&runs_dir))?;
    write(out, "spec.toml", &spec.to_toml())?;
    write(out, "runs.csv", &runs_csv(&result.rows))?;
    let summary = summarize(&result.rows);
    write(out, "summary.csv", &summary_csv(&summary))?;
    for (label, report) in &result.reports {
        write(&runs_dir, &format!("{label}.txt"), &report.to_kv())?;
    }
    eprintln!(
        "{} rows from {} simulations written to {}",
        result.rows.len(),
        result.reports.len(),
        out.display()
    );
    emit(&summary_table(&summary));
    Ok(())
}

fn summary_table(rows: &[SummaryRow]) -> String {
    let mut s = format!("{:<12} {:>9} {:>6} {:>5}", "placement", "fast", "slow", "seeds");
    for m in GAIN_METRICS {
        let _ = write!(s, " {:>w$}", m.name(), w = m.name().len().max(8));
    }
    s.push('\n');
    for r in rows {
        let _ = write!(
            s,
            "{:<12} {:>8}% {:>6} {:>5}",
            r.placement.to_string(),
            r.fast_fraction * 100.0,
            format!("1:{}", r.slow_ratio),
            r.seeds
        );
        for m in GAIN_METRICS {
            let _ = write!(s, " {:>w$}", format!("{:.1}%", r.gain(m)), w = m.name().len().max(8));
        }
        s.push('\n');
    }
    s
}

fn cmd_report(dir: &Path, csv: bool, cdf: bool) -> Result<(), Failure> {
    if cdf {
        let path = dir.join("snapshots.log");
        require_file(&path)?;
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        let stats = behavioral_stats(&CacheStateLog::parse_many(&text)?)?;
        emit(&format!(
            "# hits by chunk rank\n{}\n# stored chunks by chunk rank\n{}",
            cdf_text(&stats.hit_cdf),
            cdf_text(&stats.stored_cdf)
        ));
        return Ok(());
    }
    let path = dir.join("runs.csv");
    require_file(&path)?;
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    let summary = summarize(&parse_runs_csv(&text)?);
    if csv {
        emit(&summary_csv(&summary));
    } else {
        emit(&summary_table(&summary));
        emit(&format!(
            "gains in %: {} as LRU/OPC, {} as OPC/LRU\n",
            GAIN_METRICS
                .iter()
                .filter(|&&m| m != Metric::HitRatio)
                .map(|m| m.name())
                .collect::<Vec<_>>()
                .join(", "),
            Metric::HitRatio.name()
        ));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config, out } => cmd_run(config, out.as_deref()),
        Command::Sweep { spec, out, parallel } => cmd_sweep(spec, out, *parallel),
        Command::Report { dir, csv, cdf } => cmd_report(dir, *csv, *cdf),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("opc-sim: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Failed(msg)) => {
            eprintln!("opc-sim: {msg}");
            ExitCode::FAILURE
        }
    }
}
