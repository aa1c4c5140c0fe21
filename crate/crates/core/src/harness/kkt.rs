//! First-order stationarity diagnostics.
//!
//! The residual is the norm of the projected ascent direction: beamformer
//! gradients are projected onto the tangent cone of the power constraints and
//! phase gradients onto the unit-circle tangent lines. For the max-min problem
//! the gradient is replaced by the minimum-norm element of the convex hull of
//! the near-active users' gradients. Beamformer blocks are measured in
//! budget-normalised coordinates `W/√P`, so the value does not depend on the
//! unit of transmit power.

use crate::channel::{reflect_channel_matrix, ChannelSetMimo, ChannelSetMiso, ReflectionTopology, SystemConfig};
use crate::design::{Design, FlatDesign, SrDesign};
use crate::numerics::{hermitize, inverse_hpd};
use crate::power::PowerBudget;
use crate::wsr::UserStats;
use crate::{CMat, CVec, Result, C64};
use nalgebra::{DMatrix, DVector};

/// Objective whose stationarity is measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemKind {
    WeightedSumRate,
    SumSinr,
    MaxMin,
}

/// Constraint loads within this fraction of the budget count as active.
const ACTIVE_POWER: f64 = 1e-6;
/// Users within `MR_BAND·max(1, |min|)` of the minimum rate count as active.
const MR_BAND: f64 = 1e-4;

fn zeros_like(d: &Design) -> Design {
    Design {
        w: CMat::zeros(d.w.nrows(), d.w.ncols()),
        theta: d.theta.iter().map(|t| CVec::zeros(t.len())).collect(),
    }
}

/// Per-user ascent directions `2∂f_k/∂conj(·)` of a MISO objective. For
/// `WeightedSumRate` the user weights are applied; `MaxMin` returns the
/// unweighted rate gradients.
pub fn miso_user_gradients(
    design: &Design,
    channels: &ChannelSetMiso,
    topology: &ReflectionTopology,
    config: &SystemConfig,
    kind: ProblemKind,
) -> Result<Vec<Design>> {
    let sigma2 = config.sigma2();
    let hs = crate::channel::effective_channels(design, channels, topology)?;
    let stats = UserStats::compute(&design.w, &hs, sigma2);
    let kk = hs.len();
    let mut out = Vec::with_capacity(kk);
    for k in 0..kk {
        let h = &hs[k];
        let y = stats.y[k];
        let t = y + stats.x[k].norm_sqr();
        // g_j = w_j^H h_k; coefficient on ∂|g_j|²/∂conj
        let g: Vec<C64> = design.w.ad_mul(h).iter().copied().collect();
        let coef: Vec<f64> = (0..kk)
            .map(|j| match kind {
                ProblemKind::WeightedSumRate | ProblemKind::MaxMin => {
                    let wt = if kind == ProblemKind::MaxMin { 1.0 } else { config.weights[k] };
                    wt * (1.0 / t - if j == k { 0.0 } else { 1.0 / y })
                }
                ProblemKind::SumSinr => {
                    let wt = config.weights[k];
                    if j == k {
                        wt / y
                    } else {
                        -wt * stats.x[k].norm_sqr() / (y * y)
                    }
                }
            })
            .collect();
        let mut grad = zeros_like(design);
        for j in 0..kk {
            // ∂|w_j^H h|²/∂conj(w_j) = h (h^H w_j) = h·conj(g_j)
            let col = h * (g[j].conj() * (2.0 * coef[j]));
            grad.w.set_column(j, &col);
        }
        for l in 1..=design.theta.len() {
            if !topology.uses(k, l) {
                continue;
            }
            let (f, _) = reflect_channel_matrix(k, l, design, channels, topology)?;
            // g_j = u_j^H θ + e_j with u_j = F^H w_j, so ∂|g_j|²/∂conj θ = u_j g_j
            let fhw = f.ad_mul(&design.w);
            let mut gt = CVec::zeros(f.ncols());
            for j in 0..kk {
                gt.axpy(C64::from(2.0 * coef[j]) * g[j], &fhw.column(j).into_owned(), C64::from(1.0));
            }
            grad.theta[l - 1] = gt;
        }
        out.push(grad);
    }
    Ok(out)
}

/// Ascent direction of the total objective (sum of user gradients).
pub fn miso_gradient(
    design: &Design,
    channels: &ChannelSetMiso,
    topology: &ReflectionTopology,
    config: &SystemConfig,
    kind: ProblemKind,
) -> Result<Design> {
    let users = miso_user_gradients(design, channels, topology, config, kind)?;
    let mut total = zeros_like(design);
    for g in users {
        total.w += g.w;
        for (a, b) in total.theta.iter_mut().zip(g.theta) {
            *a += b;
        }
    }
    Ok(total)
}

/// Ascent direction `2∂R/∂conj(·)` of the D2D sum rate.
pub fn sr_gradient(design: &SrDesign, channels: &ChannelSetMimo, config: &SystemConfig) -> Result<SrDesign> {
    let sigma2 = config.sigma2();
    let kk = channels.pairs();
    let h = channels.all_cross(design);
    let mut gw: Vec<CMat> = design.w.iter().map(|w| CMat::zeros(w.nrows(), w.ncols())).collect();
    let mut gt = CVec::zeros(design.theta.len());
    for k in 0..kk {
        let mr = h[k][k].nrows();
        let mut s = CMat::identity(mr, mr) * C64::from(sigma2);
        for j in 0..kk {
            let hw = &h[k][j] * &design.w[j];
            s += &hw * hw.adjoint();
        }
        let hw = &h[k][k] * &design.w[k];
        let t = hermitize(&(&s - &hw * hw.adjoint()));
        let s_inv = inverse_hpd(&hermitize(&s), 1e-12 * sigma2)?;
        let t_inv = inverse_hpd(&t, 1e-12 * sigma2)?;
        for j in 0..kk {
            let m = if j == k { s_inv.clone() } else { &s_inv - &t_inv };
            // log det terms: ∂/∂conj W_j = H^H M H W_j
            gw[j] += h[k][j].adjoint() * &m * &h[k][j] * &design.w[j] * C64::from(2.0);
            // ∂/∂conj θ_n = (H^{rH} M H_kj W_j W_j^H G_j^H)_{nn}
            let left = channels.h_r[k].adjoint() * &m * &h[k][j] * &design.w[j];
            let right = &channels.g[j] * &design.w[j];
            for n in 0..gt.len() {
                let mut acc = C64::from(0.0);
                for c in 0..left.ncols() {
                    acc += left[(n, c)] * right[(n, c)].conj();
                }
                gt[n] += acc * 2.0;
            }
        }
    }
    Ok(SrDesign { w: gw, theta: gt })
}

fn tangent(theta: &CVec, g: &CVec) -> CVec {
    g.zip_map(theta, |gi, ti| gi - ti * (ti.conj() * gi).re)
}

fn real_dot(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Normals `2ΩW` of the active constraints, one flat vector per constraint,
/// placed at `offset` in a flat vector of length `len`.
fn active_normals(w: &CMat, budget: &PowerBudget, offset: usize, len: usize) -> Vec<Vec<C64>> {
    let m = w.nrows();
    budget
        .constraints(m)
        .iter()
        .filter(|c| c.value(w) >= c.budget * (1.0 - ACTIVE_POWER))
        .map(|c| {
            let n = &c.omega * w * C64::from(2.0);
            let mut v = vec![C64::from(0.0); len];
            v[offset..offset + n.len()].copy_from_slice(n.as_slice());
            v
        })
        .collect()
}

fn budget_scale(budget: &PowerBudget, m: usize) -> f64 {
    budget.constraints(m).iter().map(|c| c.budget).sum::<f64>().sqrt()
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &mut [f64]) {
    let mut u: Vec<f64> = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut tau = 0.0;
    for (i, ui) in u.iter().enumerate() {
        cum += ui;
        let t = (cum - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            tau = t;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - tau).max(0.0);
    }
}

/// `min ‖Σ s_k a_k − Σ μ_i n_i‖` over `s` in the simplex and `μ ≥ 0`, given the
/// Gram matrix of `[a_1..a_p, −n_1..−n_q]`.
fn cone_hull_distance(gram: &DMatrix<f64>, p: usize) -> f64 {
    let dim = gram.nrows();
    let value = |z: &DVector<f64>| (z.dot(&(gram * z))).max(0.0).sqrt();
    let project = |z: &mut DVector<f64>| {
        project_simplex(&mut z.as_mut_slice()[..p]);
        for x in z.iter_mut().skip(p) {
            *x = x.max(0.0);
        }
    };
    let lmax = gram.clone().symmetric_eigen().eigenvalues.max().max(f64::MIN_POSITIVE);
    let mut z = DVector::zeros(dim);
    for i in 0..p {
        z[i] = 1.0 / p as f64;
    }
    let mut best = value(&z);
    let mut best_z = z.clone();
    // accelerated projected gradient with restart
    let mut y = z.clone();
    let mut t = 1.0f64;
    for _ in 0..20_000 {
        let mut next = &y - (gram * &y) / lmax;
        project(&mut next);
        let v = value(&next);
        if v < best {
            best = v;
            best_z = next.clone();
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let restart = (&next - &z).dot(&(gram * &next)) > 0.0;
        y = if restart { next.clone() } else { &next + (&next - &z) * ((t - 1.0) / t_next) };
        t = if restart { 1.0 } else { t_next };
        let moved = (&next - &z).norm();
        z = next;
        if moved <= 1e-15 * (1.0 + z.norm()) {
            break;
        }
    }
    // polish: exact equality-constrained solve on the detected support
    let support: Vec<usize> = (0..dim).filter(|&i| best_z[i] > 1e-12).collect();
    let has_s = support.iter().any(|&i| i < p);
    if has_s {
        let n = support.len();
        let mut kkt = DMatrix::zeros(n + 1, n + 1);
        let mut rhs = DVector::zeros(n + 1);
        for (a, &i) in support.iter().enumerate() {
            for (b, &j) in support.iter().enumerate() {
                kkt[(a, b)] = gram[(i, j)];
            }
            if i < p {
                kkt[(a, n)] = 1.0;
                kkt[(n, a)] = 1.0;
            }
        }
        rhs[n] = 1.0;
        if let Ok(sol) = kkt.svd(true, true).solve(&rhs, 1e-14) {
            let mut cand = DVector::zeros(dim);
            for (a, &i) in support.iter().enumerate() {
                cand[i] = sol[a];
            }
            let feasible = cand.iter().all(|x| *x >= -1e-12) && (cand.rows(0, p).sum() - 1.0).abs() < 1e-9;
            if feasible {
                project(&mut cand);
                best = best.min(value(&cand));
            }
        }
    }
    best
}

fn residual_from(active: Vec<Vec<C64>>, normals: Vec<Vec<C64>>) -> f64 {
    let p = active.len();
    let vecs: Vec<Vec<C64>> = active.into_iter().chain(normals.into_iter().map(|n| n.into_iter().map(|z| -z).collect())).collect();
    let dim = vecs.len();
    let gram = DMatrix::from_fn(dim, dim, |i, j| real_dot(&vecs[i], &vecs[j]));
    cone_hull_distance(&gram, p)
}

/// Which variables a residual is taken over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KktBlocks {
    All,
    Beamformer,
    Phases,
}

/// Projected-gradient stationarity residual of a MISO design. `budget` is the
/// beamformer constraint set the solver used.
pub fn kkt_residual_miso(
    design: &Design,
    channels: &ChannelSetMiso,
    topology: &ReflectionTopology,
    config: &SystemConfig,
    kind: ProblemKind,
    budget: &PowerBudget,
) -> Result<f64> {
    kkt_residual_miso_blocks(design, channels, topology, config, kind, budget, KktBlocks::All)
}

/// [`kkt_residual_miso`] restricted to one block of variables; the other
/// block's gradient is dropped before projection.
pub fn kkt_residual_miso_blocks(
    design: &Design,
    channels: &ChannelSetMiso,
    topology: &ReflectionTopology,
    config: &SystemConfig,
    kind: ProblemKind,
    budget: &PowerBudget,
    blocks: KktBlocks,
) -> Result<f64> {
    let mut grads = miso_user_gradients(design, channels, topology, config, kind)?;
    if kind != ProblemKind::MaxMin {
        let mut total = zeros_like(design);
        for g in grads {
            total.w += g.w;
            for (a, b) in total.theta.iter_mut().zip(g.theta) {
                *a += b;
            }
        }
        grads = vec![total];
    } else {
        let hs = crate::channel::effective_channels(design, channels, topology)?;
        let rates = UserStats::compute(&design.w, &hs, config.sigma2()).rates();
        let min = rates.iter().copied().fold(f64::INFINITY, f64::min);
        let band = MR_BAND * min.abs().max(1.0);
        grads = grads.into_iter().zip(&rates).filter(|(_, r)| **r <= min + band).map(|(g, _)| g).collect();
    }
    let scale = budget_scale(budget, design.w.nrows());
    let keep_w = if blocks == KktBlocks::Phases { 0.0 } else { scale };
    let keep_t = blocks != KktBlocks::Beamformer;
    let active: Vec<Vec<C64>> = grads
        .into_iter()
        .map(|g| {
            let theta = g
                .theta
                .iter()
                .zip(&design.theta)
                .map(|(gt, t)| if keep_t { tangent(t, gt) } else { CVec::zeros(t.len()) })
                .collect();
            Design { w: g.w * C64::from(keep_w), theta }.to_flat()
        })
        .collect();
    let len = active[0].len();
    let normals = if blocks == KktBlocks::Phases { vec![] } else { active_normals(&design.w, budget, 0, len) };
    Ok(residual_from(active, normals))
}

/// Projected-gradient stationarity residual of a D2D design, with one budget
/// per transmitter.
pub fn kkt_residual_sr(
    design: &SrDesign,
    channels: &ChannelSetMimo,
    config: &SystemConfig,
    budgets: &[PowerBudget],
) -> Result<f64> {
    let g = sr_gradient(design, channels, config)?;
    let w = g.w.iter().zip(&design.w).zip(budgets).map(|((gw, w), b)| gw * C64::from(budget_scale(b, w.nrows()))).collect();
    let flat = SrDesign { w, theta: tangent(&design.theta, &g.theta) }.to_flat();
    let len = flat.len();
    let mut normals = Vec::new();
    let mut offset = 0;
    for (w, b) in design.w.iter().zip(budgets) {
        normals.extend(active_normals(w, b, offset, len));
        offset += w.len();
    }
    Ok(residual_from(vec![flat], normals))
}
