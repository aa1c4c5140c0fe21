//! Beamformer subproblems: minimize `Σ_j w_j^H R_j w_j − 2Re(w_j^H q_j)` over a
//! power constraint set.

use super::objective::WsrCoeffs;
use crate::numerics::{hermitize, modal_energy, pinv_solve, psd_eig, secular, secular_root, shifted_solve, EigenDecomposition};
use crate::options::ObjectiveKind;
use crate::power::{PowerBudget, PowerConstraint};
use crate::{CMat, CVec, Error, Result, C64};
use nalgebra::Cholesky;

/// Quadratic model of the W block. `r` holds either one matrix shared by all
/// columns or one matrix per column.
#[derive(Clone, Debug, PartialEq)]
pub struct WQuadratic {
    pub r: Vec<CMat>,
    pub q: CMat,
}

impl WQuadratic {
    pub fn shared(r: CMat, q: CMat) -> Self {
        WQuadratic { r: vec![r], q }
    }

    pub fn r_of(&self, j: usize) -> &CMat {
        if self.r.len() == 1 {
            &self.r[0]
        } else {
            &self.r[j]
        }
    }

    /// `Σ_j w_j^H R_j w_j − 2Re(w_j^H q_j)`.
    pub fn value(&self, w: &CMat) -> f64 {
        let mut v = 0.0;
        for j in 0..w.ncols() {
            let wj = w.column(j);
            v += wj.dotc(&(self.r_of(j) * wj)).re - 2.0 * wj.dotc(&self.q.column(j)).re;
        }
        v
    }
}

/// `R = Σ_k ω_kα_k h_kh_k^H`, `[Q]_{:,k} = ω_kβ_k h_k` (rate mode). In SINR mode
/// the interference term of user k excludes its own beam, so column j gets
/// `R_j = Σ_{k≠j} ω_kα_k h_kh_k^H`.
pub fn build_w_quadratic(coeffs: &WsrCoeffs, hs: &[CVec], weights: &[f64]) -> WQuadratic {
    let m = hs.first().map_or(0, |h| h.len());
    let kk = hs.len();
    if kk == 0 {
        return WQuadratic::shared(CMat::zeros(m, m), CMat::zeros(m, 0));
    }
    let h = CMat::from_columns(hs);
    let q = CMat::from_fn(m, kk, |i, k| h[(i, k)] * (coeffs.beta[k] * weights[k]));
    let scaled = CMat::from_fn(m, kk, |i, k| h[(i, k)] * (weights[k] * coeffs.alpha[k]));
    match coeffs.kind {
        ObjectiveKind::Rate => WQuadratic::shared(hermitize(&(&scaled * h.adjoint())), q),
        ObjectiveKind::Sinr => {
            let full = &scaled * h.adjoint();
            let rs = (0..kk)
                .map(|j| hermitize(&(&full - scaled.column(j) * h.column(j).adjoint())))
                .collect();
            WQuadratic { r: rs, q }
        }
    }
}

const PINV_REL: f64 = 1e-12;

/// Minimizer of the quadratic over `‖W‖_F² ≤ P`.
pub fn solve_w_total_power(r: &CMat, q: &CMat, p: f64) -> Result<CMat> {
    solve_quadratic_total(&WQuadratic::shared(r.clone(), q.clone()), p)
}

pub(crate) fn solve_quadratic_total(quad: &WQuadratic, p: f64) -> Result<CMat> {
    if !(p > 0.0) {
        return Err(Error::InvalidArgument(format!("power must be positive, got {p}")));
    }
    let (m, kk) = quad.q.shape();
    if quad.q.iter().all(|z| *z == C64::from(0.0)) {
        return Ok(CMat::zeros(m, kk));
    }
    // one eigendecomposition per distinct R, columns grouped accordingly
    let groups: Vec<(EigenDecomposition, Vec<usize>)> = if quad.r.len() == 1 {
        vec![(psd_eig(&quad.r[0])?, (0..kk).collect())]
    } else {
        (0..kk).map(|j| Ok((psd_eig(&quad.r[j])?, vec![j]))).collect::<Result<_>>()?
    };
    let sub = |cols: &[usize]| -> CMat {
        let mut s = CMat::zeros(m, cols.len());
        for (a, &c) in cols.iter().enumerate() {
            s.set_column(a, &quad.q.column(c));
        }
        s
    };
    let scatter = |w: &mut CMat, cols: &[usize], part: &CMat| {
        for (a, &c) in cols.iter().enumerate() {
            w.set_column(c, &part.column(a));
        }
    };

    // unconstrained minimizer when the system is consistent and it fits
    let mut w = CMat::zeros(m, kk);
    let mut consistent = true;
    let scale = quad.q.norm_squared();
    for (eig, cols) in &groups {
        let qs = sub(cols);
        let (x, null_energy) = pinv_solve(eig, &qs, PINV_REL);
        if null_energy > 1e-24 * scale {
            consistent = false;
            break;
        }
        scatter(&mut w, cols, &x);
    }
    if consistent && w.norm_squared() <= p {
        return Ok(w);
    }

    let mut lambda = Vec::new();
    let mut c = Vec::new();
    for (eig, cols) in &groups {
        let qs = sub(cols);
        lambda.extend(eig.lambda.iter().map(|l| l.max(0.0)));
        c.extend(modal_energy(&eig.v, &qs));
    }
    let gamma = if secular(&lambda, &c, 0.0) <= p { 0.0 } else { secular_root(&lambda, &c, p) };
    let mut w = CMat::zeros(m, kk);
    for (eig, cols) in &groups {
        let qs = sub(cols);
        scatter(&mut w, cols, &shifted_solve(eig, &qs, gamma));
    }
    // bisection leaves the power a hair off the boundary; snap it
    let pw = w.norm_squared();
    if pw > p {
        w *= C64::from((p / pw).sqrt());
    }
    Ok(w)
}

/// Line-search-free update: majorize `R ⪯ c_Σ I` with
/// `c_Σ = Σ_k ω_kα_k‖h_k‖²` and project the resulting point onto the ball.
pub fn solve_w_closed_form(
    r: &CMat,
    q: &CMat,
    coeffs: &WsrCoeffs,
    w_anchor: &CMat,
    hs: &[CVec],
    weights: &[f64],
    p: f64,
) -> CMat {
    let c_sum: f64 = hs.iter().enumerate().map(|(k, h)| weights[k] * coeffs.alpha[k] * h.norm_squared()).sum();
    let quad = WQuadratic::shared(r.clone(), q.clone());
    match closed_form_target(&quad, w_anchor, c_sum) {
        None => w_anchor.clone(),
        Some(pi) => PowerBudget::Total(p).project(&pi),
    }
}

/// `Π_j = (q_j − (R_j − cI)w̲_j)/c`, or `None` when `c = 0`.
pub(crate) fn closed_form_target(quad: &WQuadratic, w_anchor: &CMat, c: f64) -> Option<CMat> {
    if !(c > 0.0) {
        return None;
    }
    let mut pi = CMat::zeros(quad.q.nrows(), quad.q.ncols());
    for j in 0..quad.q.ncols() {
        let wj = w_anchor.column(j).into_owned();
        let col = quad.q.column(j) - (quad.r_of(j) * &wj - &wj * C64::from(c));
        pi.set_column(j, &(col / C64::from(c)));
    }
    Some(pi)
}

/// Majorizing constant for the closed-form step on a general quadratic.
pub(crate) fn closed_form_constant(quad: &WQuadratic) -> f64 {
    quad.r.iter().map(|r| r.trace().re).fold(0.0, f64::max)
}

/// Minimizer of the quadratic under `tr(Ω_j W W^H) ≤ P_j`.
pub fn solve_w_general_power(r: &CMat, q: &CMat, constraints: &[PowerConstraint]) -> Result<CMat> {
    solve_quadratic_general(&WQuadratic::shared(r.clone(), q.clone()), constraints)
}

pub(crate) fn solve_quadratic(quad: &WQuadratic, budget: &PowerBudget) -> Result<CMat> {
    match budget {
        PowerBudget::Total(p) => solve_quadratic_total(quad, *p),
        PowerBudget::General(cs) => solve_quadratic_general(quad, cs),
    }
}

const DUAL_SWEEPS: usize = 5000;
const SLACK_TOL: f64 = 1e-6;
const FEAS_TOL: f64 = 1e-8;

struct DualProblem<'a> {
    quad: &'a WQuadratic,
    cs: &'a [PowerConstraint],
}

impl DualProblem<'_> {
    /// `W(γ)`: column j solves `(R_j + Σ_i γ_i Ω_i) w_j = q_j`. `None` when the
    /// shifted matrix is singular.
    fn primal(&self, gamma: &[f64]) -> Option<CMat> {
        let (m, kk) = self.quad.q.shape();
        let mut shift = CMat::zeros(m, m);
        for (g, c) in gamma.iter().zip(self.cs) {
            if *g != 0.0 {
                shift += &c.omega * C64::from(*g);
            }
        }
        let mut w = CMat::zeros(m, kk);
        let mut cache: Option<Cholesky<C64, nalgebra::Dyn>> = None;
        for j in 0..kk {
            let chol = if self.quad.r.len() == 1 && cache.is_some() {
                cache.clone().unwrap()
            } else {
                let a = hermitize(&(self.quad.r_of(j) + &shift));
                let ch = Cholesky::new(a)?;
                let d = ch.l_dirty().diagonal();
                let (mx, mn) = d.iter().fold((0.0f64, f64::INFINITY), |(a, b), z| (a.max(z.re), b.min(z.re)));
                if !(mn > 1e-9 * mx) {
                    return None;
                }
                ch
            };
            w.set_column(j, &chol.solve(&self.quad.q.column(j).into_owned()));
            if self.quad.r.len() == 1 {
                cache = Some(chol);
            }
        }
        Some(w)
    }

    fn excess(&self, gamma: &[f64], i: usize) -> (f64, Option<CMat>) {
        match self.primal(gamma) {
            None => (f64::INFINITY, None),
            Some(w) => (self.cs[i].value(&w) - self.cs[i].budget, Some(w)),
        }
    }
}

pub(crate) fn solve_quadratic_general(quad: &WQuadratic, cs: &[PowerConstraint]) -> Result<CMat> {
    let (m, kk) = quad.q.shape();
    if cs.is_empty() {
        return Err(Error::InvalidArgument("no power constraints".into()));
    }
    if quad.q.iter().all(|z| *z == C64::from(0.0)) {
        return Ok(CMat::zeros(m, kk));
    }
    // inactive constraints: unconstrained minimizer is feasible
    let mut w0 = CMat::zeros(m, kk);
    let mut consistent = true;
    let scale = quad.q.norm_squared();
    for j in 0..kk {
        let idx = if quad.r.len() == 1 { 0 } else { j };
        if quad.r.len() == 1 && j > 0 {
            break;
        }
        let eig = psd_eig(&quad.r[idx])?;
        let qs = if quad.r.len() == 1 { quad.q.clone() } else { CMat::from_column_slice(m, 1, quad.q.column(j).as_slice()) };
        let (x, ne) = pinv_solve(&eig, &qs, PINV_REL);
        if ne > 1e-24 * scale {
            consistent = false;
            break;
        }
        if quad.r.len() == 1 {
            w0 = x;
        } else {
            w0.set_column(j, &x.column(0));
        }
    }
    if consistent && cs.iter().all(|c| c.value(&w0) <= c.budget * (1.0 + FEAS_TOL)) {
        return Ok(w0);
    }

    let dual = DualProblem { quad, cs };
    // a positive reference scale for multipliers
    let r_scale = quad.r.iter().map(|r| r.trace().re).fold(0.0, f64::max) / m as f64;
    let q_scale = quad.q.norm() / cs.iter().map(|c| c.budget).fold(f64::INFINITY, f64::min).sqrt();
    let g_ref = r_scale.max(q_scale).max(f64::MIN_POSITIVE.sqrt());
    // Start with every multiplier positive. A coordinate only drops to zero when
    // the shifted matrix stays definite there, so a singular R never leaves the
    // sweep stuck on a coordinate that cannot restore definiteness.
    let mut gamma = vec![g_ref; cs.len()];

    for _sweep in 0..DUAL_SWEEPS {
        for i in 0..cs.len() {
            gamma[i] = coordinate_root(&dual, &mut gamma.clone(), i, g_ref)?;
        }
        if let Some(w) = dual.primal(&gamma) {
            let ok = cs.iter().zip(&gamma).all(|(c, &g)| {
                let v = c.value(&w);
                let feas = v <= c.budget * (1.0 + FEAS_TOL);
                let slack = g == 0.0 || (v - c.budget).abs() <= SLACK_TOL * c.budget;
                feas && slack
            });
            if ok {
                let load = cs.iter().map(|c| c.value(&w) / c.budget).fold(0.0, f64::max);
                return Ok(if load > 1.0 { w * C64::from(1.0 / load.sqrt()) } else { w });
            }
        }
    }
    Err(Error::DualNonConvergence(format!("{} constraints, multipliers {:?}", cs.len(), gamma)))
}

/// Maximize the dual along coordinate i: `γ_i = 0` if constraint i holds there,
/// else the root of `tr(Ω_i W W^H) = P_i` (decreasing in `γ_i`).
fn coordinate_root(dual: &DualProblem, gamma: &mut [f64], i: usize, g_ref: f64) -> Result<f64> {
    let budget = dual.cs[i].budget;
    gamma[i] = 0.0;
    let (e0, _) = dual.excess(gamma, i);
    if e0 <= 0.0 {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = g_ref * 1e-6;
    let mut e_hi;
    loop {
        gamma[i] = hi;
        e_hi = dual.excess(gamma, i).0;
        if e_hi <= 0.0 {
            break;
        }
        lo = hi;
        hi *= 4.0;
        if !hi.is_finite() {
            return Err(Error::DualNonConvergence(format!("cannot bracket multiplier {i}")));
        }
    }
    // bisection in log space, then linear once the bracket is tight
    for _ in 0..200 {
        let mid = if lo > 0.0 && hi / lo > 2.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        if mid <= lo || mid >= hi {
            break;
        }
        gamma[i] = mid;
        let e = dual.excess(gamma, i).0;
        if e.abs() <= 1e-12 * budget {
            return Ok(mid);
        }
        if e > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}
