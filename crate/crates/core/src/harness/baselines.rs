//! Reference schemes: random fixed phases, and no RIS at all. Both optimise
//! only the beamformer(s) with the same BMM machinery as the full solvers.

use crate::channel::{random_phases, stream_rng, ChannelSetMimo, ChannelSetMiso, Stream, SystemConfig};
use crate::design::{project_phases, Design, SrDesign};
use crate::log::IterationLog;
use crate::mr::run_mr_bmm;
use crate::options::{PowerMode, SolverOptions};
use crate::sr::{run_sr_bmm, sr_default_init, SrMap};
use crate::wsr::{default_init, run_wsr_bmm};
use crate::{CMat, Result};

/// Objective family optimised by a baseline on a MISO system.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MisoObjective {
    /// Weighted sum rate, or sum SINR if the options ask for it.
    SumRate,
    MaxMin,
}

fn w_only(opts: &SolverOptions) -> SolverOptions {
    SolverOptions { update_theta: false, ..opts.clone() }
}

fn baseline_phases(channels: &ChannelSetMiso, config: &SystemConfig, seed: u64) -> Vec<crate::CVec> {
    let mut rng = stream_rng(seed, Stream::BaselinePhases);
    let alphabet = config.alphabet();
    channels.ris_sizes.iter().map(|&n| project_phases(&random_phases(n, &mut rng), alphabet.as_deref())).collect()
}

fn run_miso(
    config: &SystemConfig,
    channels: &ChannelSetMiso,
    opts: &SolverOptions,
    objective: MisoObjective,
    init: &Design,
) -> Result<(Design, IterationLog)> {
    let opts = w_only(opts);
    match objective {
        MisoObjective::SumRate => run_wsr_bmm(config, channels, &config.topology, &opts, init),
        MisoObjective::MaxMin => run_mr_bmm(config, channels, &opts, init),
    }
}

/// Phases drawn once from the trial's baseline stream and kept fixed while the
/// beamformer is optimised. Returns the design, its log and final objective.
pub fn random_phase_baseline(
    config: &SystemConfig,
    channels: &ChannelSetMiso,
    opts: &SolverOptions,
    objective: MisoObjective,
    seed: u64,
) -> Result<(Design, IterationLog, f64)> {
    let budget = config.miso_budget(opts.power_model == PowerMode::General)?;
    let mut init = default_init(config, channels, &budget, seed);
    init.theta = baseline_phases(channels, config, seed);
    let (d, log) = run_miso(config, channels, opts, objective, &init)?;
    let f = log.final_objective();
    Ok((d, log, f))
}

/// All reflection paths removed; only the direct links remain.
pub fn no_ris_baseline(
    config: &SystemConfig,
    channels: &ChannelSetMiso,
    opts: &SolverOptions,
    objective: MisoObjective,
    seed: u64,
) -> Result<(Design, IterationLog, f64)> {
    let mut cfg = config.clone();
    cfg.topology = config.topology.without_reflections();
    let budget = cfg.miso_budget(opts.power_model == PowerMode::General)?;
    let init = default_init(&cfg, channels, &budget, seed);
    let (d, log) = run_miso(&cfg, channels, opts, objective, &init)?;
    let f = log.final_objective();
    Ok((d, log, f))
}

/// D2D counterpart of [`random_phase_baseline`].
pub fn random_phase_baseline_sr(
    config: &SystemConfig,
    channels: &ChannelSetMimo,
    opts: &SolverOptions,
    seed: u64,
) -> Result<(SrDesign, IterationLog, f64)> {
    let map = SrMap::new(config, channels, opts)?;
    let mut init = sr_default_init(config, channels, &map.budgets, seed);
    let mut rng = stream_rng(seed, Stream::BaselinePhases);
    init.theta = project_phases(&random_phases(channels.ris_size(), &mut rng), config.alphabet().as_deref());
    let (d, log) = run_sr_bmm(config, channels, &w_only(opts), &init)?;
    let f = log.final_objective();
    Ok((d, log, f))
}

/// D2D counterpart of [`no_ris_baseline`]: the RIS→receiver links are zeroed.
pub fn no_ris_baseline_sr(
    config: &SystemConfig,
    channels: &ChannelSetMimo,
    opts: &SolverOptions,
    seed: u64,
) -> Result<(SrDesign, IterationLog, f64)> {
    let mut bare = channels.clone();
    for h in &mut bare.h_r {
        *h = CMat::zeros(h.nrows(), h.ncols());
    }
    let map = SrMap::new(config, &bare, opts)?;
    let init = sr_default_init(config, &bare, &map.budgets, seed);
    let (d, log) = run_sr_bmm(config, &bare, &w_only(opts), &init)?;
    let f = log.final_objective();
    Ok((d, log, f))
}
