//! Seeded Monte-Carlo runs over channel realisations.

use super::baselines::{
    no_ris_baseline, no_ris_baseline_sr, random_phase_baseline, random_phase_baseline_sr, MisoObjective,
};
use super::config::config_hash;
use crate::channel::{generate_mimo, generate_miso, SystemConfig};
use crate::design::{Design, SrDesign};
use crate::log::IterationLog;
use crate::mr::run_mr_bmm;
use crate::options::{PowerMode, SolverOptions};
use crate::sr::{run_sr_bmm, sr_default_init, SrMap};
use crate::wsr::{default_init, run_wsr_bmm};
use crate::{Error, Result};
use rayon::prelude::*;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "RIS_SIM_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolverKind {
    /// Weighted sum rate (or sum SINR), MISO.
    Wsr,
    /// Max-min rate, MISO.
    Mr,
    /// Sum rate of MIMO D2D pairs.
    Sr,
}

impl SolverKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::Wsr => "wsr",
            SolverKind::Mr => "mr",
            SolverKind::Sr => "sr",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wsr" => Ok(SolverKind::Wsr),
            "mr" => Ok(SolverKind::Mr),
            "sr" => Ok(SolverKind::Sr),
            other => Err(Error::InvalidArgument(format!("unknown solver {other:?}"))),
        }
    }
}

/// What is optimised in a trial.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Scheme {
    /// Joint beamformer and phase design.
    #[default]
    Joint,
    RandomPhase,
    NoRis,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TrialDesign {
    Miso(Design),
    Mimo(SrDesign),
}

#[derive(Clone, Debug)]
pub struct TrialOutcome {
    pub design: TrialDesign,
    pub log: IterationLog,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialSummary {
    pub trial: usize,
    pub seed: u64,
    /// Final objective in nats/s/Hz.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub time_ms: f64,
    pub solver: SolverKind,
    pub config_hash: String,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Aggregate {
    pub count: usize,
    pub mean: f64,
    pub stddev: f64,
    pub stderr: f64,
    pub mean_time_ms: f64,
    pub stddev_time_ms: f64,
}

/// Sample mean and (n−1) standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

impl Aggregate {
    pub fn of(summaries: &[TrialSummary]) -> Self {
        let obj: Vec<f64> = summaries.iter().map(|s| s.objective).collect();
        let time: Vec<f64> = summaries.iter().map(|s| s.time_ms).collect();
        let (mean, stddev) = mean_std(&obj);
        let (mean_time_ms, stddev_time_ms) = mean_std(&time);
        let count = obj.len();
        Aggregate { count, mean, stddev, stderr: stddev / (count as f64).sqrt(), mean_time_ms, stddev_time_ms }
    }
}

#[derive(Clone, Debug)]
pub struct TrialFailure {
    pub trial: usize,
    pub seed: u64,
    pub message: String,
}

/// Results ordered by trial index. `logs[i]` belongs to `summaries[i]`.
#[derive(Clone, Debug)]
pub struct MonteCarloReport {
    pub summaries: Vec<TrialSummary>,
    pub logs: Vec<IterationLog>,
    pub failures: Vec<TrialFailure>,
    pub aggregate: Aggregate,
}

/// One trial: draw the channels for `seed`, initialise, solve.
pub fn run_trial(
    config: &SystemConfig,
    solver: SolverKind,
    scheme: Scheme,
    seed: u64,
    opts: &SolverOptions,
) -> Result<TrialOutcome> {
    let general = opts.power_model == PowerMode::General;
    match solver {
        SolverKind::Wsr | SolverKind::Mr => {
            if config.is_mimo() {
                return Err(Error::Config(format!("solver {solver} needs a MISO scenario")));
            }
            let channels = generate_miso(config, seed)?;
            let objective = if solver == SolverKind::Wsr { MisoObjective::SumRate } else { MisoObjective::MaxMin };
            let (design, log) = match scheme {
                Scheme::Joint => {
                    let init = default_init(config, &channels, &config.miso_budget(general)?, seed);
                    if solver == SolverKind::Wsr {
                        run_wsr_bmm(config, &channels, &config.topology, opts, &init)?
                    } else {
                        run_mr_bmm(config, &channels, opts, &init)?
                    }
                }
                Scheme::RandomPhase => {
                    let (d, l, _) = random_phase_baseline(config, &channels, opts, objective, seed)?;
                    (d, l)
                }
                Scheme::NoRis => {
                    let (d, l, _) = no_ris_baseline(config, &channels, opts, objective, seed)?;
                    (d, l)
                }
            };
            Ok(TrialOutcome { design: TrialDesign::Miso(design), log })
        }
        SolverKind::Sr => {
            if !config.is_mimo() {
                return Err(Error::Config("solver sr needs a MIMO scenario".into()));
            }
            let channels = generate_mimo(config, seed)?;
            let (design, log) = match scheme {
                Scheme::Joint => {
                    let map = SrMap::new(config, &channels, opts)?;
                    let init = sr_default_init(config, &channels, &map.budgets, seed);
                    run_sr_bmm(config, &channels, opts, &init)?
                }
                Scheme::RandomPhase => {
                    let (d, l, _) = random_phase_baseline_sr(config, &channels, opts, seed)?;
                    (d, l)
                }
                Scheme::NoRis => {
                    let (d, l, _) = no_ris_baseline_sr(config, &channels, opts, seed)?;
                    (d, l)
                }
            };
            Ok(TrialOutcome { design: TrialDesign::Mimo(design), log })
        }
    }
}

/// Worker count from `RIS_SIM_THREADS`, when set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&n| n > 0)
}

/// Joint-design Monte-Carlo run; trial `i` uses seed `base_seed + i`.
pub fn monte_carlo(
    config: &SystemConfig,
    solver: SolverKind,
    trials: usize,
    base_seed: u64,
    opts: &SolverOptions,
) -> Result<MonteCarloReport> {
    monte_carlo_scheme(config, solver, Scheme::Joint, trials, base_seed, opts)
}

pub fn monte_carlo_scheme(
    config: &SystemConfig,
    solver: SolverKind,
    scheme: Scheme,
    trials: usize,
    base_seed: u64,
    opts: &SolverOptions,
) -> Result<MonteCarloReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    config.validate()?;
    let hash = config_hash(config);
    let work = |i: usize| {
        let seed = base_seed.wrapping_add(i as u64);
        let start = Instant::now();
        let out = run_trial(config, solver, scheme, seed, opts);
        (i, seed, out, start.elapsed().as_secs_f64() * 1e3)
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap() {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let results: Vec<_> = pool.install(|| (0..trials).into_par_iter().map(work).collect());

    let mut summaries = Vec::new();
    let mut logs = Vec::new();
    let mut failures = Vec::new();
    for (trial, seed, out, time_ms) in results {
        match out {
            Ok(o) => {
                summaries.push(TrialSummary {
                    trial,
                    seed,
                    objective: o.log.final_objective(),
                    iterations: o.log.iterations(),
                    converged: o.log.converged,
                    time_ms,
                    solver,
                    config_hash: hash.clone(),
                });
                logs.push(o.log);
            }
            Err(e) => failures.push(TrialFailure { trial, seed, message: e.to_string() }),
        }
    }
    let aggregate = Aggregate::of(&summaries);
    Ok(MonteCarloReport { summaries, logs, failures, aggregate })
}
