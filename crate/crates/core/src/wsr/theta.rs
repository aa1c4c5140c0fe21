//! Phase-block updates of the sum-rate family.

use super::objective::WsrCoeffs;
use crate::channel::{reflect_channel_matrix, ChannelSetMiso, ReflectionTopology, SystemConfig};
use crate::design::Design;
use crate::numerics::unit_phase;
use crate::options::ObjectiveKind;
use crate::surrogates::LinearizedForm;
use crate::{CMat, CVec, Result, C64};

/// Quadratic minorizer of the objective in `θ_l`:
/// `q(θ) = −θ^H L θ + 2Re(θ^H c) + constant` with `L = Σ_t s_t U_t U_t^H`.
#[derive(Clone, Debug)]
pub struct ThetaModel {
    /// Weight and N×J factor of each term of `L`.
    pub terms: Vec<(f64, CMat)>,
    pub c: CVec,
    /// `λ = Σ_t s_t‖U_t‖_F²`, an upper bound on `λ_max(L)`.
    pub lambda: f64,
    pub constant: f64,
}

impl ThetaModel {
    pub fn apply_l(&self, theta: &CVec) -> CVec {
        let mut out = CVec::zeros(theta.len());
        for (s, u) in &self.terms {
            let coef = u.ad_mul(theta);
            out.gemv(C64::from(*s), u, &coef, C64::from(1.0));
        }
        out
    }

    pub fn dense_l(&self) -> CMat {
        let n = self.c.len();
        let mut l = CMat::zeros(n, n);
        for (s, u) in &self.terms {
            l.gemm(C64::from(*s), u, &u.adjoint(), C64::from(1.0));
        }
        l
    }

    pub fn value(&self, theta: &CVec) -> f64 {
        -theta.dotc(&self.apply_l(theta)).re + 2.0 * theta.dotc(&self.c).re + self.constant
    }

    /// `b = (L − λI)θ̲ − c` and the tangent constant.
    pub fn linearize(&self, anchor: &CVec) -> LinearizedForm {
        let la = self.apply_l(anchor);
        let value = -anchor.dotc(&la).re + 2.0 * anchor.dotc(&self.c).re + self.constant;
        let b = la - anchor * C64::from(self.lambda) - &self.c;
        let c0 = value + 2.0 * anchor.dotc(&b).re;
        LinearizedForm { b, c0 }
    }
}

/// Per-user pieces of the θ_l model: `U = F_{k,l}^H W` and `e = W^H d_{k,l}`.
pub(crate) struct UserPieces {
    pub u: CMat,
    pub e: CVec,
}

pub(crate) fn user_pieces(
    k: usize,
    l: usize,
    design: &Design,
    channels: &ChannelSetMiso,
    topology: &ReflectionTopology,
) -> Result<UserPieces> {
    let (f, d) = reflect_channel_matrix(k, l, design, channels, topology)?;
    Ok(UserPieces { u: f.ad_mul(&design.w), e: design.w.ad_mul(&d) })
}

/// Model of user k's minorizer in θ_l with `weight` applied, added into
/// `terms`/`c`. Rate mode counts every beam in the interference-plus-signal
/// power, SINR mode skips the user's own beam.
pub(crate) fn accumulate_user(
    k: usize,
    weight: f64,
    pieces: &UserPieces,
    coeffs: &WsrCoeffs,
    terms: &mut Vec<(f64, CMat)>,
    c: &mut CVec,
    lambda: &mut f64,
) {
    let a = weight * coeffs.alpha[k];
    c.axpy(C64::from(weight) * coeffs.beta[k].conj(), &pieces.u.column(k), C64::from(1.0));
    if a == 0.0 {
        return;
    }
    let u = if coeffs.kind == ObjectiveKind::Sinr { pieces.u.clone().remove_column(k) } else { pieces.u.clone() };
    let e = if coeffs.kind == ObjectiveKind::Sinr { pieces.e.clone().remove_row(k) } else { pieces.e.clone() };
    c.gemv(C64::from(-a), &u, &e, C64::from(1.0));
    *lambda += a * u.norm_squared();
    terms.push((a, u));
}

pub fn theta_model(
    l: usize,
    design: &Design,
    coeffs: &WsrCoeffs,
    channels: &ChannelSetMiso,
    topology: &ReflectionTopology,
    config: &SystemConfig,
) -> Result<ThetaModel> {
    let n = channels.ris_sizes[l - 1];
    let mut terms = Vec::new();
    let mut c = CVec::zeros(n);
    let mut lambda = 0.0;
    let mut f_anchor = 0.0;
    for k in 0..channels.users() {
        if !topology.uses(k, l) {
            continue;
        }
        let pieces = user_pieces(k, l, design, channels, topology)?;
        accumulate_user(k, config.weights[k], &pieces, coeffs, &mut terms, &mut c, &mut lambda);
        f_anchor += config.weights[k] * coeffs.anchor_value(k);
    }
    let mut model = ThetaModel { terms, c, lambda, constant: 0.0 };
    let theta = &design.theta[l - 1];
    model.constant = f_anchor - model.value(theta);
    Ok(model)
}

/// Linear minorizer `−2Re(θ_l^H b_l) + c0` of the objective in `θ_l`, tangent at
/// the anchor.
pub fn build_theta_linear(
    l: usize,
    design: &Design,
    coeffs: &WsrCoeffs,
    channels: &ChannelSetMiso,
    topology: &ReflectionTopology,
    config: &SystemConfig,
) -> Result<LinearizedForm> {
    Ok(theta_model(l, design, coeffs, channels, topology, config)?.linearize(&design.theta[l - 1]))
}

/// `θ = e^{j·arg(−b)}`, the minimizer of `Re(θ^H b)` on the unit circle.
pub fn solve_theta_unimodulus(b: &CVec) -> CVec {
    b.map(|z| unit_phase(-z))
}

/// Alphabet point minimizing `Re(e^{−jφ} b)`; near-ties go to the smaller φ.
pub fn nearest_phase(b: C64, alphabet: &[f64]) -> C64 {
    let mag = b.norm();
    let mut best = f64::INFINITY;
    let mut pick = C64::from(1.0);
    let mut sorted: Vec<f64> = alphabet.to_vec();
    sorted.sort_by(f64::total_cmp);
    for &phi in &sorted {
        let z = C64::from_polar(1.0, phi);
        let v = (z.conj() * b).re;
        if v < best - 1e-12 * mag {
            best = v;
            pick = z;
        }
    }
    pick
}

pub fn solve_theta_discrete(b: &CVec, alphabet: &[f64]) -> CVec {
    b.map(|z| nearest_phase(z, alphabet))
}

pub(crate) fn solve_phase(b: &CVec, alphabet: Option<&[f64]>) -> CVec {
    match alphabet {
        Some(a) => solve_theta_discrete(b, a),
        None => solve_theta_unimodulus(b),
    }
}

/// Element-by-element exact maximization of the quadratic model; each step
/// uses the already updated entries.
pub fn update_theta_serial_model(model: &ThetaModel, anchor: &CVec, alphabet: Option<&[f64]>) -> CVec {
    serial_sweep(&model.dense_l(), &model.c, anchor, alphabet)
}

/// One element-by-element pass maximizing `−θ^H L θ + 2Re(θ^H c)` over the
/// unit circle or the alphabet, starting from `anchor`.
pub fn serial_sweep(l: &CMat, c: &CVec, anchor: &CVec, alphabet: Option<&[f64]>) -> CVec {
    let mut theta = anchor.clone();
    for j in 0..theta.len() {
        let mut s = -c[j];
        for (i, t) in theta.iter().enumerate() {
            if i != j {
                s += l[(j, i)] * t;
            }
        }
        theta[j] = match alphabet {
            Some(a) => nearest_phase(s, a),
            None => unit_phase(-s),
        };
    }
    theta
}

pub fn update_theta_serial(
    l: usize,
    design: &Design,
    coeffs: &WsrCoeffs,
    channels: &ChannelSetMiso,
    topology: &ReflectionTopology,
    config: &SystemConfig,
) -> Result<CVec> {
    let model = theta_model(l, design, coeffs, channels, topology, config)?;
    let alphabet = config.alphabet();
    Ok(update_theta_serial_model(&model, &design.theta[l - 1], alphabet.as_deref()))
}
