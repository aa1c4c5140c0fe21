//! SQUAREM extrapolation for monotone BMM maps (step-length scheme S3).

use crate::design::FlatDesign;
use crate::log::IterationLog;
use crate::options::{converged, SolverOptions};
use crate::{Result, C64};
use std::time::Instant;

/// Bookkeeping for one extrapolation cycle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AccelState {
    /// Step length actually used (≤ −1).
    pub alpha: f64,
    pub accepted: bool,
    /// Objective of the plain two-step point `F(F(x))`.
    pub two_step: f64,
    /// Objective of the emitted point.
    pub emitted: f64,
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Accelerate the fixed-point iteration `x ← step(x)`.
///
/// Each cycle evaluates `x1 = F(x)`, `x2 = F(x1)`, forms `r = x1 − x`,
/// `v = x2 − x1 − r`, `α = min(−‖r‖/‖v‖, −1)` and the candidate
/// `project(x − 2αr + α²v)`. The candidate is emitted only if its objective is
/// at least that of `x2`; otherwise `x2` is emitted. `max_outer_iters` bounds the
/// number of map evaluations. Record `i` of the log carries
/// `[f(x1), f(x2), f(emitted)]` as its block snapshots.
pub fn squarem_wrap<T, F, P, O>(step: F, project: P, objective: O, x0: &T, opts: &SolverOptions) -> Result<(T, IterationLog)>
where
    T: FlatDesign,
    F: Fn(&T) -> Result<T>,
    P: Fn(&T) -> T,
    O: Fn(&T) -> Result<f64>,
{
    let (x, log, _) = squarem_trace(step, project, objective, x0, opts)?;
    Ok((x, log))
}

/// [`squarem_wrap`] that also returns the per-cycle state.
pub fn squarem_trace<T, F, P, O>(
    step: F,
    project: P,
    objective: O,
    x0: &T,
    opts: &SolverOptions,
) -> Result<(T, IterationLog, Vec<AccelState>)>
where
    T: FlatDesign,
    F: Fn(&T) -> Result<T>,
    P: Fn(&T) -> T,
    O: Fn(&T) -> Result<f64>,
{
    let start = Instant::now();
    let mut log = IterationLog::default();
    let mut states = Vec::new();
    let mut x = x0.clone();
    let mut f = objective(&x)?;
    log.push(f, 0.0, vec![]);
    while log.map_evaluations + 2 <= opts.max_outer_iters {
        let x1 = step(&x)?;
        let x2 = step(&x1)?;
        log.map_evaluations += 2;
        let f1 = objective(&x1)?;
        let f2 = objective(&x2)?;
        let p0 = x.to_flat();
        let p1 = x1.to_flat();
        let p2 = x2.to_flat();
        let r: Vec<C64> = p1.iter().zip(&p0).map(|(a, b)| a - b).collect();
        let v: Vec<C64> = p2.iter().zip(&p1).zip(&r).map(|((a, b), c)| a - b - c).collect();
        let (nr, nv) = (norm(&r), norm(&v));
        if nv == 0.0 || nr == 0.0 {
            log.push(f2, start.elapsed().as_secs_f64() * 1e3, vec![f1, f2, f2]);
            states.push(AccelState { alpha: -1.0, accepted: false, two_step: f2, emitted: f2 });
            x = x2;
            log.converged = true;
            break;
        }
        let alpha = (-nr / nv).min(-1.0);
        let cand: Vec<C64> = p0
            .iter()
            .zip(&r)
            .zip(&v)
            .map(|((x0, r), v)| x0 - r * (2.0 * alpha) + v * (alpha * alpha))
            .collect();
        let xc = project(&x.with_flat(&cand));
        let fc = objective(&xc)?;
        let accepted = fc.is_finite() && fc >= f2;
        let (next, f_next) = if accepted { (xc, fc) } else { (x2, f2) };
        if accepted {
            log.accepted += 1;
        } else {
            log.rejected += 1;
        }
        states.push(AccelState { alpha, accepted, two_step: f2, emitted: f_next });
        log.push(f_next, start.elapsed().as_secs_f64() * 1e3, vec![f1, f2, f_next]);
        x = next;
        let done = converged(f, f_next, opts.rel_tol);
        f = f_next;
        if done {
            log.converged = true;
            break;
        }
    }
    Ok((x, log, states))
}
