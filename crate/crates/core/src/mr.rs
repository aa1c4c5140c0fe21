//! Max-min rate maximization: each block's minimax surrogate problem is solved
//! over the simplex by mirror ascent (MAA).

use crate::channel::{effective_channels, ChannelSetMiso, ReflectionTopology, SystemConfig};
use crate::design::Design;
use crate::log::IterationLog;
use crate::numerics::unit_phase;
use crate::options::{converged, ObjectiveKind, PowerMode, SolverOptions};
use crate::power::PowerBudget;
use crate::wsr::{nearest_phase, solve_quadratic, user_pieces, UserStats, WQuadratic, WsrCoeffs, WsrMap};
use crate::{CMat, CVec, Result, C64};
use std::time::Instant;

/// Point on the scaled simplex `{s ≥ 0, Σs = c}` plus the MAA clock.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexState {
    pub s: Vec<f64>,
    pub t: usize,
    pub r: f64,
    pub c: f64,
}

impl SimplexState {
    pub fn uniform(k: usize, r: f64, c: f64) -> Self {
        SimplexState { s: vec![c / k as f64; k], t: 1, r, c }
    }

    pub fn gamma(&self) -> f64 {
        self.r / (self.t as f64).sqrt()
    }
}

/// `s⁺ = c·(s⊙e^{−γg}) / 1ᵀ(s⊙e^{−γg})` with `γ = r/√t`; computed in the log
/// domain so large |g| neither overflows nor drives an entry to zero.
pub fn maa_step(state: &SimplexState, g: &[f64]) -> SimplexState {
    let gamma = state.gamma();
    let logs: Vec<f64> = state.s.iter().zip(g).map(|(s, gi)| s.ln() - gamma * gi).collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut s: Vec<f64> = logs.iter().map(|l| (l - top).exp().max(1e-300)).collect();
    let total: f64 = s.iter().sum();
    for x in s.iter_mut() {
        *x *= state.c / total;
    }
    SimplexState { s, t: state.t + 1, r: state.r, c: state.c }
}

/// `min_k log(1+SINR_k)`.
pub fn mr_objective(design: &Design, channels: &ChannelSetMiso, config: &SystemConfig) -> Result<f64> {
    let hs = effective_channels(design, channels, &config.topology)?;
    Ok(UserStats::compute(&design.w, &hs, config.sigma2()).rates().into_iter().fold(f64::INFINITY, f64::min))
}

/// User k's W-block surrogate `−tr(W^H R_k W) + 2Re(w_k^H q_k) + const_k` with
/// `R_k = α_k h_kh_k^H`, `q_k = β_k h_k`.
#[derive(Clone, Debug)]
pub struct MrUserQuadratic {
    pub r: CMat,
    pub q: CVec,
    pub constant: f64,
}

pub fn mr_user_quadratics(coeffs: &WsrCoeffs, hs: &[CVec]) -> Vec<MrUserQuadratic> {
    hs.iter()
        .enumerate()
        .map(|(k, h)| MrUserQuadratic {
            r: h * h.adjoint() * C64::from(coeffs.alpha[k]),
            q: h * coeffs.beta[k],
            constant: coeffs.constant[k],
        })
        .collect()
}

fn weighted_quadratic(s: &[f64], users: &[MrUserQuadratic]) -> WQuadratic {
    let m = users[0].r.nrows();
    let mut r = CMat::zeros(m, m);
    let mut q = CMat::zeros(m, users.len());
    for (k, u) in users.iter().enumerate() {
        r += &u.r * C64::from(s[k]);
        q.set_column(k, &(&u.q * C64::from(s[k])));
    }
    WQuadratic::shared(crate::numerics::hermitize(&r), q)
}

/// Minimizer of `Σ_k s_k(tr(W^H R_k W) − 2Re(w_k^H q_k))` over the budget.
pub fn mr_w_inner_solve(s: &[f64], users: &[MrUserQuadratic], budget: &PowerBudget) -> Result<CMat> {
    solve_quadratic(&weighted_quadratic(s, users), budget)
}

/// `[g_w]_k = tr(X^H R_k X) − 2Re(x_k^H q_k) − const_k`, i.e. minus user k's
/// surrogate at X.
pub fn mr_w_subgradient(x: &CMat, users: &[MrUserQuadratic]) -> Vec<f64> {
    users
        .iter()
        .enumerate()
        .map(|(k, u)| {
            let quad: f64 = (0..x.ncols()).map(|j| crate::numerics::quad_form(&u.r, &x.column(j).into_owned())).sum();
            quad - 2.0 * x.column(k).dotc(&u.q).re - u.constant
        })
        .collect()
}

/// `θ = e^{j·arg(−Σ_k s_k b_k)}`; entries where the sum vanishes keep `prev`.
pub fn mr_theta_inner_solve(s: &[f64], bs: &[CVec], prev: &CVec, alphabet: Option<&[f64]>) -> CVec {
    let mut acc = CVec::zeros(prev.len());
    for (sk, b) in s.iter().zip(bs) {
        acc.axpy(C64::from(*sk), b, C64::from(1.0));
    }
    CVec::from_fn(prev.len(), |j, _| {
        let z = acc[j];
        match alphabet {
            Some(a) => nearest_phase(z, a),
            None if z.norm() == 0.0 => prev[j],
            None => unit_phase(-z),
        }
    })
}

/// Per-user linear minorizers `−2Re(θ^H b_k) + κ_k` of the rates in θ_l.
pub fn mr_theta_forms(
    l: usize,
    design: &Design,
    coeffs: &WsrCoeffs,
    channels: &ChannelSetMiso,
    topology: &ReflectionTopology,
) -> Result<Vec<(CVec, f64)>> {
    let anchor = &design.theta[l - 1];
    let n = anchor.len();
    (0..channels.users())
        .map(|k| {
            if !topology.uses(k, l) {
                return Ok((CVec::zeros(n), coeffs.rate[k]));
            }
            let pieces = user_pieces(k, l, design, channels, topology)?;
            let mut terms = Vec::new();
            let mut c = CVec::zeros(n);
            let mut lambda = 0.0;
            crate::wsr::accumulate_user(k, 1.0, &pieces, coeffs, &mut terms, &mut c, &mut lambda);
            let model = crate::wsr::ThetaModel { terms, c, lambda, constant: 0.0 };
            let mut model = model;
            model.constant = coeffs.rate[k] - model.value(anchor);
            let lin = model.linearize(anchor);
            Ok((lin.b, lin.c0))
        })
        .collect()
}

fn min_value(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Result of one MAA run.
pub struct MaaOutcome<X> {
    pub x: X,
    /// `min_k` surrogate at the returned point.
    pub value: f64,
    pub iterations: usize,
    pub accepted: bool,
}

/// Generic MAA driver. `inner(s)` returns the minimizer of `Σ s_k v_k`,
/// `values(x)` the per-user surrogate values `g_k(x) = −v_k(x)`.
fn run_maa<X: Clone>(
    k: usize,
    opts: &SolverOptions,
    cap: usize,
    start: &SimplexState,
    anchor: X,
    anchor_value: f64,
    mut inner: impl FnMut(&[f64]) -> Result<X>,
    values: impl Fn(&X) -> Vec<f64>,
    mut average: Option<&mut dyn FnMut(&X, f64)>,
) -> Result<(MaaOutcome<X>, SimplexState)> {
    let mut state = start.clone();
    debug_assert_eq!(state.s.len(), k);
    let mut best = anchor;
    let mut best_val = anchor_value;
    let mut accepted = false;
    let mut h_prev = f64::NAN;
    let mut iters = 0;
    for _ in 0..cap {
        iters += 1;
        let x = inner(&state.s)?;
        let g = values(&x);
        let val = min_value(&g);
        if val > best_val {
            best_val = val;
            best = x.clone();
            accepted = true;
        }
        if let Some(avg) = average.as_mut() {
            avg(&x, state.gamma());
        }
        // dual value h(s) = Σ s_k v_k(X(s)) / c
        let h: f64 = -state.s.iter().zip(&g).map(|(s, gk)| s * gk).sum::<f64>() / state.c;
        let done = h_prev.is_finite() && converged(h_prev, h, opts.inner_tol);
        h_prev = h;
        // ascend h: the update rule descends its argument, so pass −v = g
        state = maa_step(&state, &g);
        if done {
            break;
        }
    }
    Ok((MaaOutcome { x: best, value: best_val, iterations: iters, accepted }, state))
}

/// Alternating W / Θ blocks, each solved by MAA, with a safeguard that keeps
/// the previous block value unless the block's min-surrogate improves.
pub fn run_mr_bmm(
    config: &SystemConfig,
    channels: &ChannelSetMiso,
    opts: &SolverOptions,
    init: &Design,
) -> Result<(Design, IterationLog)> {
    let topology = &config.topology;
    let check = WsrMap::new(config, channels, topology, opts)?;
    check.check_feasible(init)?;
    let budget = config.miso_budget(opts.power_model == PowerMode::General)?;
    let alphabet = config.alphabet();
    let sigma2 = config.sigma2();
    let kk = channels.users();
    let start = Instant::now();

    let mut log = IterationLog::default();
    let mut d = init.clone();
    let mut f = mr_objective(&d, channels, config)?;
    log.push(f, 0.0, vec![]);
    let mut warm_w = SimplexState::uniform(kk, opts.step_r, opts.simplex_c);
    let mut warm_t = warm_w.clone();

    for _ in 0..opts.max_outer_iters {
        let mut blocks = Vec::new();
        // W block
        let hs = effective_channels(&d, channels, topology)?;
        let coeffs = WsrCoeffs::from_stats(&UserStats::compute(&d.w, &hs, sigma2), sigma2, ObjectiveKind::Rate);
        let users = mr_user_quadratics(&coeffs, &hs);
        let anchor_val = min_value(&coeffs.rate);
        let s0 = if opts.warm_start { warm_w.clone() } else { SimplexState::uniform(kk, opts.step_r, opts.simplex_c) };
        let mut avg = CMat::zeros(d.w.nrows(), d.w.ncols());
        let mut avg_wt = 0.0;
        let mut add = |x: &CMat, wt: f64| {
            avg += x * C64::from(wt);
            avg_wt += wt;
        };
        let (out, s_end) = run_maa(
            kk,
            opts,
            opts.inner_w_cap,
            &s0,
            d.w.clone(),
            anchor_val,
            |s| mr_w_inner_solve(s, &users, &budget),
            |x| mr_w_subgradient(x, &users).into_iter().map(|v| -v).collect(),
            Some(&mut add),
        )?;
        warm_w = SimplexState { t: 1, ..s_end };
        let mut w_new = out.x;
        if avg_wt > 0.0 {
            let xa = budget.project(&(avg / C64::from(avg_wt)));
            let va = min_value(&mr_w_subgradient(&xa, &users).into_iter().map(|v| -v).collect::<Vec<_>>());
            if va > out.value {
                w_new = xa;
            }
        }
        d.w = w_new;
        blocks.push(mr_objective(&d, channels, config)?);

        // Θ blocks
        if opts.update_theta {
            for l in 1..=d.theta.len() {
                if !(0..kk).any(|k| topology.uses(k, l)) {
                    continue;
                }
                let hs = effective_channels(&d, channels, topology)?;
                let coeffs = WsrCoeffs::from_stats(&UserStats::compute(&d.w, &hs, sigma2), sigma2, ObjectiveKind::Rate);
                let forms = mr_theta_forms(l, &d, &coeffs, channels, topology)?;
                let bs: Vec<CVec> = forms.iter().map(|(b, _)| b.clone()).collect();
                let prev = d.theta[l - 1].clone();
                let anchor_val = min_value(&coeffs.rate);
                let s0 = if opts.warm_start { warm_t.clone() } else { SimplexState::uniform(kk, opts.step_r, opts.simplex_c) };
                let values = |x: &CVec| -> Vec<f64> { forms.iter().map(|(b, c0)| -2.0 * x.dotc(b).re + c0).collect() };
                let (out, s_end) = run_maa(
                    kk,
                    opts,
                    opts.inner_theta_cap,
                    &s0,
                    prev.clone(),
                    anchor_val,
                    |s| Ok(mr_theta_inner_solve(s, &bs, &prev, alphabet.as_deref())),
                    values,
                    None,
                )?;
                warm_t = SimplexState { t: 1, ..s_end };
                d.theta[l - 1] = out.x;
                blocks.push(mr_objective(&d, channels, config)?);
            }
        }
        log.map_evaluations += 1;
        let f_next = *blocks.last().expect("W block");
        log.push(f_next, start.elapsed().as_secs_f64() * 1e3, blocks);
        let done = converged(f, f_next, opts.rel_tol);
        f = f_next;
        if done {
            log.converged = true;
            break;
        }
    }
    Ok((d, log))
}
