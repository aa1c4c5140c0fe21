use super::beamformer::{build_w_quadratic, closed_form_constant, closed_form_target, solve_quadratic};
use super::objective::{weighted_value, UserStats, WsrCoeffs};
use super::theta::{solve_phase, theta_model, update_theta_serial_model};
use crate::accel::squarem_wrap;
use crate::channel::{effective_channels, random_phases, stream_rng, ChannelSetMiso, ReflectionTopology, Stream, SystemConfig};
use crate::design::{in_alphabet, modulus_defect, project_phases, Design};
use crate::log::IterationLog;
use crate::options::{converged, Acceleration, PowerMode, SolverOptions, ThetaUpdate, WUpdate};
use crate::power::PowerBudget;
use crate::{CMat, CVec, Error, Result, C64};
use std::time::Instant;

/// One outer BMM iteration of the sum-rate family as a reusable map.
pub struct WsrMap<'a> {
    pub config: &'a SystemConfig,
    pub channels: &'a ChannelSetMiso,
    pub topology: &'a ReflectionTopology,
    pub opts: &'a SolverOptions,
    pub budget: PowerBudget,
    pub alphabet: Option<Vec<f64>>,
    sigma2: f64,
}

impl<'a> WsrMap<'a> {
    pub fn new(
        config: &'a SystemConfig,
        channels: &'a ChannelSetMiso,
        topology: &'a ReflectionTopology,
        opts: &'a SolverOptions,
    ) -> Result<Self> {
        let budget = config.miso_budget(opts.power_model == PowerMode::General)?;
        Ok(WsrMap { config, channels, topology, opts, budget, alphabet: config.alphabet(), sigma2: config.sigma2() })
    }

    pub fn objective(&self, d: &Design) -> Result<f64> {
        let hs = effective_channels(d, self.channels, self.topology)?;
        Ok(weighted_value(&UserStats::compute(&d.w, &hs, self.sigma2), &self.config.weights, self.opts.objective_kind))
    }

    fn coeffs(&self, d: &Design, hs: &[CVec]) -> WsrCoeffs {
        WsrCoeffs::from_stats(&UserStats::compute(&d.w, hs, self.sigma2), self.sigma2, self.opts.objective_kind)
    }

    pub fn check_feasible(&self, d: &Design) -> Result<()> {
        if d.w.nrows() != self.channels.bs_antennas || d.w.ncols() != self.channels.users() {
            return Err(Error::Shape(format!("W is {}x{}", d.w.nrows(), d.w.ncols())));
        }
        if d.theta.len() != self.channels.ris_sizes.len()
            || d.theta.iter().zip(&self.channels.ris_sizes).any(|(t, &n)| t.len() != n)
        {
            return Err(Error::Shape("phase vectors do not match the RIS sizes".into()));
        }
        if !self.budget.is_feasible(&d.w, 1e-9) {
            return Err(Error::Infeasible(format!("power load {:.6}", self.budget.load(&d.w))));
        }
        let defect = modulus_defect(&d.theta);
        if defect > 1e-9 {
            return Err(Error::Infeasible(format!("phase modulus off by {defect:.3e}")));
        }
        if let Some(a) = &self.alphabet {
            if !d.theta.iter().all(|t| in_alphabet(t, a)) {
                return Err(Error::Infeasible("phases outside the discrete alphabet".into()));
            }
        }
        Ok(())
    }

    /// Beamformer block update at fixed phases.
    pub fn update_w(&self, d: &Design) -> Result<CMat> {
        let hs = effective_channels(d, self.channels, self.topology)?;
        self.update_w_at(d, &hs)
    }

    fn value_at(&self, w: &CMat, hs: &[CVec]) -> f64 {
        weighted_value(&UserStats::compute(w, hs, self.sigma2), &self.config.weights, self.opts.objective_kind)
    }

    fn update_w_at(&self, d: &Design, hs: &[CVec]) -> Result<CMat> {
        let coeffs = self.coeffs(d, hs);
        let quad = build_w_quadratic(&coeffs, hs, &self.config.weights);
        match self.opts.w_update {
            WUpdate::LineSearch => solve_quadratic(&quad, &self.budget),
            WUpdate::ClosedForm => {
                let c = closed_form_constant(&quad);
                match closed_form_target(&quad, &d.w, c) {
                    None => Ok(d.w.clone()),
                    Some(pi) => match &self.budget {
                        PowerBudget::Total(p) => Ok(PowerBudget::Total(*p).project(&pi)),
                        PowerBudget::General(_) => {
                            let m = d.w.nrows();
                            let iso = super::beamformer::WQuadratic::shared(
                                CMat::identity(m, m) * C64::from(c),
                                &pi * C64::from(c),
                            );
                            solve_quadratic(&iso, &self.budget)
                        }
                    },
                }
            }
        }
    }

    /// Phase block update for RIS `l` (1-based).
    pub fn update_theta(&self, d: &Design, l: usize) -> Result<CVec> {
        let hs = effective_channels(d, self.channels, self.topology)?;
        self.update_theta_at(d, &hs, l)
    }

    fn update_theta_at(&self, d: &Design, hs: &[CVec], l: usize) -> Result<CVec> {
        let coeffs = self.coeffs(d, hs);
        let model = theta_model(l, d, &coeffs, self.channels, self.topology, self.config)?;
        let anchor = &d.theta[l - 1];
        Ok(match self.opts.theta_update {
            ThetaUpdate::Parallel => solve_phase(&model.linearize(anchor).b, self.alphabet.as_deref()),
            ThetaUpdate::Serial => update_theta_serial_model(&model, anchor, self.alphabet.as_deref()),
        })
    }

    /// W block then every RIS in index order. Returns the true objective after
    /// each block.
    pub fn step(&self, d: &Design) -> Result<(Design, Vec<f64>)> {
        let mut next = d.clone();
        let mut blocks = Vec::with_capacity(1 + next.theta.len());
        let mut hs = effective_channels(&next, self.channels, self.topology)?;
        next.w = self.update_w_at(&next, &hs)?;
        blocks.push(self.value_at(&next.w, &hs));
        if self.opts.update_theta {
            for l in 1..=next.theta.len() {
                if !(0..self.channels.users()).any(|k| self.topology.uses(k, l)) {
                    continue;
                }
                next.theta[l - 1] = self.update_theta_at(&next, &hs, l)?;
                hs = effective_channels(&next, self.channels, self.topology)?;
                blocks.push(self.value_at(&next.w, &hs));
            }
        }
        Ok((next, blocks))
    }

    /// Feasibility restoration used after extrapolation.
    pub fn project(&self, d: &Design) -> Design {
        Design {
            w: self.budget.project(&d.w),
            theta: d.theta.iter().map(|t| project_phases(t, self.alphabet.as_deref())).collect(),
        }
    }
}

/// Cyclic BMM for the (weighted) sum-rate or sum-SINR objective.
pub fn run_wsr_bmm(
    config: &SystemConfig,
    channels: &ChannelSetMiso,
    topology: &ReflectionTopology,
    opts: &SolverOptions,
    init: &Design,
) -> Result<(Design, IterationLog)> {
    let map = WsrMap::new(config, channels, topology, opts)?;
    map.check_feasible(init)?;
    if opts.acceleration == Acceleration::Squarem {
        return squarem_wrap(
            |d: &Design| map.step(d).map(|(x, _)| x),
            |d: &Design| map.project(d),
            |d: &Design| map.objective(d),
            init,
            opts,
        );
    }
    let start = Instant::now();
    let mut log = IterationLog::default();
    let mut f = map.objective(init)?;
    log.push(f, 0.0, vec![]);
    let mut d = init.clone();
    for _ in 0..opts.max_outer_iters {
        let (next, blocks) = map.step(&d)?;
        log.map_evaluations += 1;
        let f_next = *blocks.last().expect("at least the W block");
        log.push(f_next, start.elapsed().as_secs_f64() * 1e3, blocks);
        d = next;
        let done = converged(f, f_next, opts.rel_tol);
        f = f_next;
        if done {
            log.converged = true;
            break;
        }
    }
    Ok((d, log))
}

/// `W = √(P/K)·[h^d_k/‖h^d_k‖]` scaled onto the constraint set, random phases
/// from the trial's init stream (alphabet points when discrete).
pub fn default_init(config: &SystemConfig, channels: &ChannelSetMiso, budget: &PowerBudget, seed: u64) -> Design {
    let m = channels.bs_antennas;
    let kk = channels.users();
    let mut w = CMat::zeros(m, kk);
    for (k, h) in channels.h_direct.iter().enumerate() {
        let n = h.norm();
        if n > 0.0 {
            w.set_column(k, &(h / C64::from(n)));
        } else {
            w[(k % m, k)] = C64::from(1.0);
        }
    }
    let load = budget.load(&w);
    if load > 0.0 {
        w *= C64::from(1.0 / load.sqrt());
    }
    let mut rng = stream_rng(seed, Stream::InitPhases);
    let alphabet = config.alphabet();
    let theta = channels
        .ris_sizes
        .iter()
        .map(|&n| project_phases(&random_phases(n, &mut rng), alphabet.as_deref()))
        .collect();
    Design { w, theta }
}
