//! Parameter sweeps, normalized gains and cache-behavior statistics.

mod stats;
mod sweep;

pub use stats::{behavioral_stats, cdf_text, BehavioralStats, ObjectStats};
pub use sweep::{
    gain, parse_runs_csv, run_sweep, runs_csv, summarize, summary_csv, Direction, Metric, RunMetrics, SummaryRow,
    SweepResult, SweepRow, GAIN_METRICS,
};
