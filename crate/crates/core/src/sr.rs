//! Sum-rate maximization for RIS-aided MIMO D2D pairs via the log-det
//! minorizer.

use crate::accel::squarem_wrap;
use crate::channel::{random_phases, stream_rng, ChannelSetMimo, Stream, SystemConfig};
use crate::design::{modulus_defect, in_alphabet, project_phases, SrDesign};
use crate::log::IterationLog;
use crate::numerics::{hermitize, largest_eigenvalue, log_det_hpd};
use crate::options::{converged, Acceleration, PowerMode, SolverOptions, ThetaUpdate};
use crate::power::PowerBudget;
use crate::surrogates::{matrix_rate_minorizer, LinearizedForm};
use crate::wsr::{serial_sweep, solve_quadratic, WQuadratic};
use crate::{CMat, CVec, Error, Result, C64};
use std::time::Instant;

const CHOL_JITTER_REL: f64 = 1e-12;

/// Interference-plus-noise covariance of receiver k.
fn interference(k: usize, h: &[Vec<CMat>], w: &[CMat], sigma2: f64) -> CMat {
    let mr = h[k][k].nrows();
    let mut t = CMat::identity(mr, mr) * C64::from(sigma2);
    for (j, wj) in w.iter().enumerate() {
        if j != k {
            let hw = &h[k][j] * wj;
            t += &hw * hw.adjoint();
        }
    }
    hermitize(&t)
}

/// `R_k = log det(T_k + H_kk W_k W_k^H H_kk^H) − log det T_k` for every pair.
pub fn sr_rates(design: &SrDesign, channels: &ChannelSetMimo, sigma2: f64) -> Result<Vec<f64>> {
    let h = channels.all_cross(design);
    let jitter = CHOL_JITTER_REL * sigma2;
    (0..channels.pairs())
        .map(|k| {
            let t = interference(k, &h, &design.w, sigma2);
            let x = &h[k][k] * &design.w[k];
            let s = &t + &x * x.adjoint();
            Ok(log_det_hpd(&s, jitter)? - log_det_hpd(&t, jitter)?)
        })
        .collect()
}

pub fn sr_objective(design: &SrDesign, channels: &ChannelSetMimo, config: &SystemConfig) -> Result<f64> {
    Ok(sr_rates(design, channels, config.sigma2())?.iter().sum())
}

/// Matrix minorizer coefficients per pair, anchored at `(H_kk W̲_k, T_k)`.
#[derive(Clone, Debug)]
pub struct SrCoeffs {
    pub a: Vec<CMat>,
    pub b: Vec<CMat>,
    pub c0: Vec<f64>,
    pub rate: Vec<f64>,
}

pub fn compute_sr_coeffs(design: &SrDesign, channels: &ChannelSetMimo, config: &SystemConfig) -> Result<SrCoeffs> {
    let sigma2 = config.sigma2();
    let h = channels.all_cross(design);
    let kk = channels.pairs();
    let mut out = SrCoeffs { a: vec![], b: vec![], c0: vec![], rate: vec![] };
    for k in 0..kk {
        let t = interference(k, &h, &design.w, sigma2);
        let x = &h[k][k] * &design.w[k];
        let mm = matrix_rate_minorizer(&x, &t)?;
        let s = &t + &x * x.adjoint();
        let jitter = CHOL_JITTER_REL * sigma2;
        out.rate.push(log_det_hpd(&s, jitter)? - log_det_hpd(&t, jitter)?);
        out.a.push(mm.a);
        out.b.push(mm.b);
        out.c0.push(mm.c0);
    }
    Ok(out)
}

/// `Σ_k [−tr(A_k S_k) + 2Re tr(B_k H_kk W_k) + c0_k]` at a design.
pub fn sr_surrogate_value(coeffs: &SrCoeffs, channels: &ChannelSetMimo, design: &SrDesign, sigma2: f64) -> f64 {
    let h = channels.all_cross(design);
    (0..channels.pairs())
        .map(|k| {
            let mr = h[k][k].nrows();
            let mut s = CMat::identity(mr, mr) * C64::from(sigma2);
            for (j, wj) in design.w.iter().enumerate() {
                let hw = &h[k][j] * wj;
                s += &hw * hw.adjoint();
            }
            let lin = (&coeffs.b[k] * &h[k][k] * &design.w[k]).trace().re;
            -(&coeffs.a[k] * s).trace().re + 2.0 * lin + coeffs.c0[k]
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum()
}

/// `R_k = Σ_j H_{j,k}^H A_j H_{j,k}`, `Q_k = H_kk^H B_k^H`.
pub fn build_wk_quadratic(k: usize, coeffs: &SrCoeffs, channels: &ChannelSetMimo, design: &SrDesign) -> (CMat, CMat) {
    let kk = channels.pairs();
    let mt = channels.g[k].ncols();
    let mut r = CMat::zeros(mt, mt);
    for j in 0..kk {
        let hjk = channels.cross(j, k, &design.theta);
        r += hjk.adjoint() * &coeffs.a[j] * &hjk;
    }
    let hkk = channels.cross(k, k, &design.theta);
    (hermitize(&r), hkk.adjoint() * coeffs.b[k].adjoint())
}

/// `L = (Σ_k H^{rH}_k A_k H^r_k) ⊙ (Σ_j G_j W_j W_j^H G_j^H)ᵀ` and
/// `N = Σ_k G_k W_k B_k H^r_k − Σ_{k,j} G_j W_j W_j^H H^{dH}_{kj} A_k H^r_k`, so the
/// surrogate in θ is `−θ^H L θ + 2Re(θᵀ diag(N)) + const`.
pub fn build_theta_quadratic(coeffs: &SrCoeffs, channels: &ChannelSetMimo, design: &SrDesign) -> (CMat, CMat) {
    let kk = channels.pairs();
    let n = channels.ris_size();
    let mut k1 = CMat::zeros(n, n);
    let mut k2 = CMat::zeros(n, n);
    let mut nmat = CMat::zeros(n, n);
    let gw: Vec<CMat> = (0..kk).map(|j| &channels.g[j] * &design.w[j]).collect();
    for k in 0..kk {
        let hr = &channels.h_r[k];
        let ahr = &coeffs.a[k] * hr;
        k1 += hr.adjoint() * &ahr;
        k2 += &gw[k] * gw[k].adjoint();
        nmat += &gw[k] * &coeffs.b[k] * hr;
        for j in 0..kk {
            nmat -= &gw[j] * (design.w[j].adjoint() * channels.h_d[k][j].adjoint()) * &ahr;
        }
    }
    let l = hermitize(&k1.component_mul(&k2.transpose()));
    (l, nmat)
}

/// Linear minorizer in the θ^H pairing: `b = (L − λ̂I)θ̲ − conj(diag N)`.
/// The θᵀ-paired vector `diag(θ̲^H(L−λ̂I)^H − N)` is `conj(b)`.
pub fn linearize_theta_sr(l: &CMat, nmat: &CMat, anchor: &CVec, shift: f64) -> LinearizedForm {
    let n = nmat.diagonal();
    let b = l * anchor - anchor * C64::from(shift) - n.map(|z| z.conj());
    let quad = -anchor.dotc(&(l * anchor)).re + 2.0 * (anchor.transpose() * &n)[(0, 0)].re;
    let c0 = quad + 2.0 * anchor.dotc(&b).re;
    LinearizedForm { b, c0 }
}

/// The θ-quadratic surrogate without its constant.
pub fn theta_quadratic_value(l: &CMat, nmat: &CMat, theta: &CVec) -> f64 {
    -theta.dotc(&(l * theta)).re + 2.0 * (theta.transpose() * nmat.diagonal())[(0, 0)].re
}

/// One outer iteration of the D2D solver as a map.
pub struct SrMap<'a> {
    pub config: &'a SystemConfig,
    pub channels: &'a ChannelSetMimo,
    pub opts: &'a SolverOptions,
    pub budgets: Vec<PowerBudget>,
    pub alphabet: Option<Vec<f64>>,
}

impl<'a> SrMap<'a> {
    pub fn new(config: &'a SystemConfig, channels: &'a ChannelSetMimo, opts: &'a SolverOptions) -> Result<Self> {
        let budgets = (0..channels.pairs())
            .map(|k| config.pair_budget(k, opts.power_model == PowerMode::General))
            .collect::<Result<_>>()?;
        Ok(SrMap { config, channels, opts, budgets, alphabet: config.alphabet() })
    }

    pub fn objective(&self, d: &SrDesign) -> Result<f64> {
        sr_objective(d, self.channels, self.config)
    }

    pub fn check_feasible(&self, d: &SrDesign) -> Result<()> {
        if d.w.len() != self.channels.pairs() || d.theta.len() != self.channels.ris_size() {
            return Err(Error::Shape("design does not match the channel set".into()));
        }
        for (k, (w, b)) in d.w.iter().zip(&self.budgets).enumerate() {
            if w.nrows() != self.channels.g[k].ncols() {
                return Err(Error::Shape(format!("W_{k} has {} rows", w.nrows())));
            }
            if !b.is_feasible(w, 1e-9) {
                return Err(Error::Infeasible(format!("W_{k} power load {:.6}", b.load(w))));
            }
        }
        let defect = modulus_defect([&d.theta]);
        if defect > 1e-9 {
            return Err(Error::Infeasible(format!("phase modulus off by {defect:.3e}")));
        }
        if let Some(a) = &self.alphabet {
            if !in_alphabet(&d.theta, a) {
                return Err(Error::Infeasible("phases outside the discrete alphabet".into()));
            }
        }
        Ok(())
    }

    pub fn update_w(&self, d: &SrDesign) -> Result<Vec<CMat>> {
        let coeffs = compute_sr_coeffs(d, self.channels, self.config)?;
        (0..self.channels.pairs())
            .map(|k| {
                let (r, q) = build_wk_quadratic(k, &coeffs, self.channels, d);
                solve_quadratic(&WQuadratic::shared(r, q), &self.budgets[k])
            })
            .collect()
    }

    pub fn update_theta(&self, d: &SrDesign) -> Result<CVec> {
        let coeffs = compute_sr_coeffs(d, self.channels, self.config)?;
        let (l, nmat) = build_theta_quadratic(&coeffs, self.channels, d);
        if self.opts.theta_update == ThetaUpdate::Serial {
            let c = nmat.diagonal().map(|z| z.conj());
            return Ok(serial_sweep(&l, &c, &d.theta, self.alphabet.as_deref()));
        }
        let shift = largest_eigenvalue(&l, 1e-10)?.value;
        let lin = linearize_theta_sr(&l, &nmat, &d.theta, shift);
        Ok(crate::wsr::solve_phase(&lin.b, self.alphabet.as_deref()))
    }

    pub fn step(&self, d: &SrDesign) -> Result<(SrDesign, Vec<f64>)> {
        let mut next = d.clone();
        next.w = self.update_w(&next)?;
        let mut blocks = vec![self.objective(&next)?];
        if self.opts.update_theta {
            next.theta = self.update_theta(&next)?;
            blocks.push(self.objective(&next)?);
        }
        Ok((next, blocks))
    }

    pub fn project(&self, d: &SrDesign) -> SrDesign {
        SrDesign {
            w: d.w.iter().zip(&self.budgets).map(|(w, b)| b.project(w)).collect(),
            theta: project_phases(&d.theta, self.alphabet.as_deref()),
        }
    }
}

pub fn run_sr_bmm(
    config: &SystemConfig,
    channels: &ChannelSetMimo,
    opts: &SolverOptions,
    init: &SrDesign,
) -> Result<(SrDesign, IterationLog)> {
    let map = SrMap::new(config, channels, opts)?;
    map.check_feasible(init)?;
    if opts.acceleration == Acceleration::Squarem {
        return squarem_wrap(
            |d: &SrDesign| map.step(d).map(|(x, _)| x),
            |d: &SrDesign| map.project(d),
            |d: &SrDesign| map.objective(d),
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
        let f_next = *blocks.last().expect("W block");
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

/// `W_k = √(P_k/(M^t_k d_k))·[first d_k DFT columns]` scaled onto the budget,
/// random phases from the init stream.
pub fn sr_default_init(config: &SystemConfig, channels: &ChannelSetMimo, budgets: &[PowerBudget], seed: u64) -> SrDesign {
    let dims = config.mimo.as_ref();
    let w = (0..channels.pairs())
        .map(|k| {
            let mt = channels.g[k].ncols();
            let d = dims.map_or(mt, |m| m.streams[k]);
            let mut wk = CMat::from_fn(mt, d, |m, n| {
                C64::from_polar(1.0, -std::f64::consts::TAU * (m * (n % mt)) as f64 / mt as f64)
            });
            let load = budgets[k].load(&wk);
            wk *= C64::from(1.0 / load.sqrt());
            wk
        })
        .collect();
    let mut rng = stream_rng(seed, Stream::InitPhases);
    let alphabet = config.alphabet();
    let theta = project_phases(&random_phases(channels.ris_size(), &mut rng), alphabet.as_deref());
    SrDesign { w, theta }
}
