//! Optimisation iterates.

use crate::numerics::unit_phase;
use crate::wsr::nearest_phase;
use crate::{CMat, CVec, C64};

/// MISO iterate: beamformer `W` (M×K, column k serves user k) and one phase
/// vector per RIS.
#[derive(Clone, Debug, PartialEq)]
pub struct Design {
    pub w: CMat,
    pub theta: Vec<CVec>,
}

/// MIMO D2D iterate: one precoder per pair and the single RIS phase vector.
#[derive(Clone, Debug, PartialEq)]
pub struct SrDesign {
    pub w: Vec<CMat>,
    pub theta: CVec,
}

/// Largest deviation of `|θ_j|` from one over all entries.
pub fn modulus_defect<'a>(thetas: impl IntoIterator<Item = &'a CVec>) -> f64 {
    thetas
        .into_iter()
        .flat_map(|t| t.iter())
        .map(|z| (z.norm() - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Flat complex representation used by extrapolation schemes.
pub trait FlatDesign: Clone {
    fn to_flat(&self) -> Vec<C64>;
    /// Rebuild a value shaped like `self` from a flat vector.
    fn with_flat(&self, flat: &[C64]) -> Self;
}

impl FlatDesign for Design {
    fn to_flat(&self) -> Vec<C64> {
        let mut out: Vec<C64> = self.w.iter().copied().collect();
        for t in &self.theta {
            out.extend(t.iter().copied());
        }
        out
    }

    fn with_flat(&self, flat: &[C64]) -> Self {
        let nw = self.w.len();
        let w = CMat::from_column_slice(self.w.nrows(), self.w.ncols(), &flat[..nw]);
        let mut at = nw;
        let theta = self
            .theta
            .iter()
            .map(|t| {
                let v = CVec::from_column_slice(&flat[at..at + t.len()]);
                at += t.len();
                v
            })
            .collect();
        Design { w, theta }
    }
}

impl FlatDesign for SrDesign {
    fn to_flat(&self) -> Vec<C64> {
        let mut out = Vec::new();
        for w in &self.w {
            out.extend(w.iter().copied());
        }
        out.extend(self.theta.iter().copied());
        out
    }

    fn with_flat(&self, flat: &[C64]) -> Self {
        let mut at = 0;
        let w = self
            .w
            .iter()
            .map(|wk| {
                let m = CMat::from_column_slice(wk.nrows(), wk.ncols(), &flat[at..at + wk.len()]);
                at += wk.len();
                m
            })
            .collect();
        let theta = CVec::from_column_slice(&flat[at..at + self.theta.len()]);
        SrDesign { w, theta }
    }
}

/// Nearest feasible phase vector: `e^{j·arg(z)}` entrywise, or the closest
/// alphabet point when `alphabet` is given.
pub fn project_phases(t: &CVec, alphabet: Option<&[f64]>) -> CVec {
    match alphabet {
        None => t.map(unit_phase),
        Some(a) => t.map(|z| nearest_phase(-z, a)),
    }
}

/// Whether every entry is within 1e-9 of an alphabet point.
pub fn in_alphabet(t: &CVec, alphabet: &[f64]) -> bool {
    t.iter().all(|z| alphabet.iter().any(|&p| (z - C64::from_polar(1.0, p)).norm() <= 1e-9))
}
