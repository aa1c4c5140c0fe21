use crate::channel::{effective_channels, ChannelSetMiso, ReflectionTopology, SystemConfig};
use crate::design::Design;
use crate::options::ObjectiveKind;
use crate::{CMat, CVec, Result, C64};

/// Per-user link quantities at a beamformer for fixed effective channels.
#[derive(Clone, Debug, PartialEq)]
pub struct UserStats {
    /// `x_k = w_k^H h_k`.
    pub x: Vec<C64>,
    /// Interference plus noise `y_k = Σ_{j≠k}|w_j^H h_k|² + σ²`.
    pub y: Vec<f64>,
}

impl UserStats {
    pub fn compute(w: &CMat, hs: &[CVec], sigma2: f64) -> Self {
        let kk = hs.len();
        if kk == 0 {
            return UserStats { x: vec![], y: vec![] };
        }
        // g[(j, k)] = w_j^H h_k
        let g = w.ad_mul(&CMat::from_columns(hs));
        let mut x = Vec::with_capacity(kk);
        let mut y = Vec::with_capacity(kk);
        for (k, col) in g.column_iter().enumerate() {
            let total: f64 = col.iter().map(|z| z.norm_sqr()).sum();
            x.push(col[k]);
            y.push(sigma2 + (total - col[k].norm_sqr()).max(0.0));
        }
        UserStats { x, y }
    }

    pub fn sinr(&self) -> Vec<f64> {
        self.x.iter().zip(&self.y).map(|(x, y)| x.norm_sqr() / y).collect()
    }

    pub fn rates(&self) -> Vec<f64> {
        self.sinr().into_iter().map(f64::ln_1p).collect()
    }
}

pub fn weighted_value(stats: &UserStats, weights: &[f64], kind: ObjectiveKind) -> f64 {
    let per = match kind {
        ObjectiveKind::Rate => stats.rates(),
        ObjectiveKind::Sinr => stats.sinr(),
    };
    per.iter().zip(weights).map(|(r, w)| r * w).sum()
}

/// `Σ_k ω_k log(1+SINR_k)` in nats/s/Hz.
pub fn wsr_objective(
    design: &Design,
    channels: &ChannelSetMiso,
    topology: &ReflectionTopology,
    config: &SystemConfig,
) -> Result<f64> {
    let hs = effective_channels(design, channels, topology)?;
    Ok(weighted_value(&UserStats::compute(&design.w, &hs, config.sigma2()), &config.weights, ObjectiveKind::Rate))
}

/// `Σ_k ω_k SINR_k`.
pub fn sum_sinr_objective(
    design: &Design,
    channels: &ChannelSetMiso,
    topology: &ReflectionTopology,
    config: &SystemConfig,
) -> Result<f64> {
    let hs = effective_channels(design, channels, topology)?;
    Ok(weighted_value(&UserStats::compute(&design.w, &hs, config.sigma2()), &config.weights, ObjectiveKind::Sinr))
}

/// Per-user minorizer coefficients frozen at an anchor.
///
/// Rate mode: `log(1+SINR_k) ≥ −α_k T_k + 2Re(β_k w_k^H h_k) + const_k` with
/// `T_k = Σ_j |w_j^H h_k|² + σ²`.
/// SINR mode: `SINR_k ≥ −α_k y_k + 2Re(β_k w_k^H h_k)` with `y_k` excluding user k.
#[derive(Clone, Debug, PartialEq)]
pub struct WsrCoeffs {
    pub kind: ObjectiveKind,
    pub alpha: Vec<f64>,
    pub beta: Vec<C64>,
    pub rate: Vec<f64>,
    pub sinr: Vec<f64>,
    /// Constant collecting everything independent of the design variables,
    /// including the `−α_kσ²` noise term.
    pub constant: Vec<f64>,
}

impl WsrCoeffs {
    pub fn from_stats(stats: &UserStats, sigma2: f64, kind: ObjectiveKind) -> Self {
        let sinr = stats.sinr();
        let rate: Vec<f64> = sinr.iter().map(|s| s.ln_1p()).collect();
        let kk = sinr.len();
        let mut alpha = Vec::with_capacity(kk);
        let mut beta = Vec::with_capacity(kk);
        let mut constant = Vec::with_capacity(kk);
        for k in 0..kk {
            let x = stats.x[k];
            let y = stats.y[k];
            let b = if x.norm_sqr() == 0.0 { C64::from(0.0) } else { x.conj() / y };
            match kind {
                ObjectiveKind::Rate => {
                    let t = y + x.norm_sqr();
                    let a = sinr[k] / t;
                    alpha.push(a);
                    constant.push(rate[k] - sinr[k] - a * sigma2);
                }
                ObjectiveKind::Sinr => {
                    let a = x.norm_sqr() / (y * y);
                    alpha.push(a);
                    constant.push(-a * sigma2);
                }
            }
            beta.push(b);
        }
        WsrCoeffs { kind, alpha, beta, rate, sinr, constant }
    }

    /// Value of user k's minorizer at a new `(x_k, y_k)`.
    pub fn user_surrogate(&self, k: usize, x: C64, y: f64, sigma2: f64) -> f64 {
        let lin = 2.0 * (self.beta[k] * x).re;
        match self.kind {
            ObjectiveKind::Rate => -self.alpha[k] * (y + x.norm_sqr() - sigma2) + lin + self.constant[k],
            ObjectiveKind::Sinr => -self.alpha[k] * (y - sigma2) + lin + self.constant[k],
        }
    }

    /// Anchor value of user k's objective term.
    pub fn anchor_value(&self, k: usize) -> f64 {
        match self.kind {
            ObjectiveKind::Rate => self.rate[k],
            ObjectiveKind::Sinr => self.sinr[k],
        }
    }
}

pub fn compute_wsr_coeffs(
    design: &Design,
    channels: &ChannelSetMiso,
    topology: &ReflectionTopology,
    config: &SystemConfig,
) -> Result<WsrCoeffs> {
    let hs = effective_channels(design, channels, topology)?;
    let s2 = config.sigma2();
    Ok(WsrCoeffs::from_stats(&UserStats::compute(&design.w, &hs, s2), s2, ObjectiveKind::Rate))
}

/// Weighted surrogate `Σ_k ω_k g_k` at a design with effective channels `hs`.
pub fn surrogate_value(coeffs: &WsrCoeffs, weights: &[f64], w: &CMat, hs: &[CVec], sigma2: f64) -> f64 {
    let st = UserStats::compute(w, hs, sigma2);
    (0..hs.len()).map(|k| weights[k] * coeffs.user_surrogate(k, st.x[k], st.y[k], sigma2)).sum()
}
