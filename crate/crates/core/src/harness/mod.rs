//! Experiment harness: config files, baselines, Monte-Carlo runs, diagnostics
//! and output.

mod baselines;
mod config;
mod emit;
mod kkt;
mod monte_carlo;

pub use baselines::{no_ris_baseline, no_ris_baseline_sr, random_phase_baseline, random_phase_baseline_sr, MisoObjective};
pub use config::{
    config_hash, load_config, load_config_file, save_config, ConfigFile, ConstraintFile, LinkFile, PathsFile,
    RicianFile, Scenario, TopologyFile,
};
pub use emit::{csv_bytes, csv_rows, emit_results, read_csv, svg_chart, write_csv, write_svg, CsvRow, CSV_HEADER};
pub use kkt::{kkt_residual_miso, kkt_residual_miso_blocks, kkt_residual_sr, KktBlocks, miso_gradient, miso_user_gradients, sr_gradient, ProblemKind};
pub use monte_carlo::{
    mean_std, monte_carlo, monte_carlo_scheme, run_trial, thread_cap, Aggregate, MonteCarloReport, Scheme,
    SolverKind, TrialDesign, TrialFailure, TrialOutcome, TrialSummary, THREADS_ENV,
};
